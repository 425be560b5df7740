#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace nexus {

// Shortest round-trip decimal form. Emitted files must be byte-identical
// across reruns, so all numeric output funnels through here.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// RFC-4180-style quoting: quote only when the field contains a comma, quote,
// or newline.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

} // namespace nexus
