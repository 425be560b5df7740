#pragma once

#include <stdexcept>
#include <string>

namespace nexus {

// Base error. `kind` separates bad-input failures (CLI exit code 2) from
// runtime/model failures (exit code 3).
class Error : public std::runtime_error {
public:
    enum class Kind { input, runtime };

    Error(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& m) : Error(Kind::input, m) {}
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& m) : Error(Kind::input, m) {}
};

class DuplicateKeyError : public Error {
public:
    explicit DuplicateKeyError(const std::string& m) : Error(Kind::input, m) {}
};

class GapError : public Error {
public:
    explicit GapError(const std::string& m) : Error(Kind::input, m) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& m) : Error(Kind::input, m) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& m) : Error(Kind::input, m) {}
};

class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& m) : Error(Kind::input, m) {}
};

class DegenerateDataError : public Error {
public:
    explicit DegenerateDataError(const std::string& m) : Error(Kind::input, m) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& m) : Error(Kind::runtime, m) {}
};

} // namespace nexus
