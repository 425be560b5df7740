#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "nexus/errors.hpp"

namespace nexus {

// Dense row-major matrix of doubles. Small and value-semantic; all model
// code works on copies or const references.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        Matrix m;
        m.rows_ = rows.size();
        m.cols_ = rows.size() == 0 ? 0 : rows.begin()->size();
        m.data_.reserve(m.rows_ * m.cols_);
        for (const auto& r : rows) {
            if (r.size() != m.cols_) {
                throw ShapeError("matrix literal has ragged rows");
            }
            m.data_.insert(m.data_.end(), r.begin(), r.end());
        }
        return m;
    }

    static Matrix column_vector(const std::vector<double>& v) {
        Matrix m(v.size(), 1);
        for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data_.data() + r * cols_, cols_);
    }
    std::span<double> row(std::size_t r) {
        return std::span<double>(data_.data() + r * cols_, cols_);
    }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, c);
        return out;
    }

    void set_column(std::size_t c, const std::vector<double>& v) {
        if (v.size() != rows_) throw ShapeError("set_column: length mismatch");
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, c) = v[i];
    }

    Matrix select_columns(const std::vector<int>& cols) const {
        Matrix out(rows_, cols.size());
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols.size(); ++j) {
                out(i, j) = (*this)(i, static_cast<std::size_t>(cols[j]));
            }
        }
        return out;
    }

    Matrix select_rows(const std::vector<int>& rows) const {
        Matrix out(rows.size(), cols_);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < cols_; ++j) {
                out(i, j) = (*this)(static_cast<std::size_t>(rows[i]), j);
            }
        }
        return out;
    }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace nexus
