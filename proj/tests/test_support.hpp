#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "nexus/matrix.hpp"
#include "nexus/rng.hpp"

namespace testsup {

// Exhaustive depth-1 oracle, deliberately independent of the library split
// scan: every (feature, midpoint) candidate is evaluated with two-pass means
// and index-order prediction SSE.
struct StumpOracle {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
    double left_value = 0.0;
    double right_value = 0.0;
};

inline double partition_sse(const std::vector<double>& y, const std::vector<bool>& go_left,
                            double left_value, double right_value) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double d = y[i] - (go_left[i] ? left_value : right_value);
        s += d * d;
    }
    return s;
}

inline StumpOracle brute_force_stump(const nexus::Matrix& X, const std::vector<double>& y,
                                     int min_leaf = 1) {
    StumpOracle best;
    const std::size_t n = y.size();
    for (std::size_t j = 0; j < X.cols(); ++j) {
        std::vector<double> values = X.column(j);
        std::vector<double> distinct = values;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (std::size_t t = 0; t + 1 < distinct.size(); ++t) {
            double threshold = distinct[t] + (distinct[t + 1] - distinct[t]) / 2.0;
            std::vector<bool> go_left(n);
            double left_sum = 0.0;
            double right_sum = 0.0;
            std::size_t n_left = 0;
            for (std::size_t i = 0; i < n; ++i) {
                go_left[i] = values[i] <= threshold;
                if (go_left[i]) {
                    left_sum += y[i];
                    ++n_left;
                } else {
                    right_sum += y[i];
                }
            }
            std::size_t n_right = n - n_left;
            if (n_left < static_cast<std::size_t>(min_leaf) ||
                n_right < static_cast<std::size_t>(min_leaf)) {
                continue;
            }
            double lv = left_sum / static_cast<double>(n_left);
            double rv = right_sum / static_cast<double>(n_right);
            double sse = partition_sse(y, go_left, lv, rv);
            if (sse < best.sse) {
                best = {true, static_cast<int>(j), threshold, sse, lv, rv};
            }
        }
    }
    return best;
}

inline nexus::Matrix random_matrix(std::size_t rows, std::size_t cols, nexus::Rng& rng,
                                   double lo = -1.0, double hi = 1.0) {
    nexus::Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            m(i, j) = lo + (hi - lo) * rng.next_double();
        }
    }
    return m;
}

inline std::vector<double> random_vector(std::size_t n, nexus::Rng& rng, double lo = -1.0,
                                         double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = lo + (hi - lo) * rng.next_double();
    return v;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        base_ = std::filesystem::temp_directory_path() /
                ("nexus_test_" + tag + "_" + std::to_string(counter_++));
        std::filesystem::remove_all(base_);
        std::filesystem::create_directories(base_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(base_, ec);
    }
    std::filesystem::path path() const { return base_; }
    std::string file(const std::string& name) const { return (base_ / name).string(); }

private:
    std::filesystem::path base_;
    static inline int counter_ = 0;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    f << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

} // namespace testsup
