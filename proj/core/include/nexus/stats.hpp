#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace nexus {

inline double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample variance, n-1 denominator. Returns 0 for n < 2.
inline double sample_variance(std::span<const double> v) {
    std::size_t n = v.size();
    if (n < 2) return 0.0;
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(n - 1);
}

inline double sample_stddev(std::span<const double> v) {
    return std::sqrt(sample_variance(v));
}

// Sample covariance, n-1 denominator. Returns 0 for n < 2.
inline double sample_covariance(std::span<const double> a, std::span<const double> b) {
    std::size_t n = a.size();
    if (n != b.size()) throw std::invalid_argument("covariance: length mismatch");
    if (n < 2) return 0.0;
    double ma = mean(a);
    double mb = mean(b);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(n - 1);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz).
inline double betacf(double a, double b, double x) {
    constexpr int max_iter = 200;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                   a * std::log(x) + b * std::log(1.0 - x);
    double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * detail::betacf(a, b, x) / a;
    }
    return 1.0 - bt * detail::betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a Student-t statistic with df degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) throw std::invalid_argument("student_t_two_sided_p: df must be positive");
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

} // namespace nexus
