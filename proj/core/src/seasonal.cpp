#include "nexus/seasonal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nexus/errors.hpp"
#include "nexus/format.hpp"

namespace nexus {

namespace {

void require_finite(const std::vector<double>& series, const char* who) {
    for (double v : series) {
        if (!std::isfinite(v)) throw ValidationError(std::string(who) + ": non-finite value");
    }
}

// Least-squares line removal over t = 0..n-1.
std::vector<double> detrend_linear(const std::vector<double>& series) {
    const std::size_t n = series.size();
    double t_mean = static_cast<double>(n - 1) / 2.0;
    double x_mean = 0.0;
    for (double v : series) x_mean += v;
    x_mean /= static_cast<double>(n);

    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double dt = static_cast<double>(t) - t_mean;
        sxy += dt * (series[t] - x_mean);
        sxx += dt * dt;
    }
    double slope = sxx > 0.0 ? sxy / sxx : 0.0;

    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        out[t] = series[t] - x_mean - slope * (static_cast<double>(t) - t_mean);
    }
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

} // namespace

Periodogram periodogram(const std::vector<double>& series) {
    const std::size_t n = series.size();
    if (n < 8) throw InsufficientDataError("periodogram: need at least 8 points");
    require_finite(series, "periodogram");

    std::vector<double> d = detrend_linear(series);

    Periodogram pg;
    pg.series_length = static_cast<int>(n);
    const std::size_t half = n / 2;
    pg.frequencies.resize(half);
    pg.power.resize(half);

    for (std::size_t k = 1; k <= half; ++k) {
        double re = 0.0;
        double im = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            double angle = -2.0 * std::numbers::pi * static_cast<double>(k) *
                           static_cast<double>(t) / static_cast<double>(n);
            re += d[t] * std::cos(angle);
            im += d[t] * std::sin(angle);
        }
        double mag2 = (re * re + im * im) / static_cast<double>(n);
        bool nyquist = (n % 2 == 0) && (k == half);
        double scale = nyquist ? 1.0 / static_cast<double>(n) : 2.0 / static_cast<double>(n);
        pg.frequencies[k - 1] = static_cast<double>(k) / static_cast<double>(n);
        pg.power[k - 1] = scale * mag2;
    }
    return pg;
}

std::optional<int> detect_seasonality(const Periodogram& pg, const DetectionParams& params) {
    if (params.candidate_periods.empty()) {
        throw ConfigError("detect_seasonality: empty candidate period set");
    }
    const std::size_t bins = pg.power.size();
    const int n = pg.series_length;

    double total = 0.0;
    for (double p : pg.power) total += p;
    if (total <= params.min_total_power) return std::nullopt;

    double med = median(pg.power);

    int best_period = 0;
    double best_power = -1.0;
    for (int period : params.candidate_periods) {
        if (period < 2) throw ConfigError("detect_seasonality: period must be >= 2");
        long bin = std::lround(static_cast<double>(n) / static_cast<double>(period));
        if (bin < 1 || static_cast<std::size_t>(bin) > bins) {
            throw ConfigError("detect_seasonality: period " + std::to_string(period) +
                              " is not representable for series length " + std::to_string(n));
        }
        double p = pg.power[static_cast<std::size_t>(bin - 1)];
        if (p > best_power) {
            best_power = p;
            best_period = period;
        }
    }

    if (best_power >= params.peak_threshold * med) return best_period;
    return std::nullopt;
}

SeasonalDecomposition decompose(const std::vector<double>& series, int period) {
    const std::size_t n = series.size();
    if (period < 2) throw ConfigError("decompose: period must be >= 2");
    if (n < 2 * static_cast<std::size_t>(period)) {
        throw InsufficientDataError("decompose: need at least 2 full periods (" +
                                    std::to_string(2 * period) + " points, got " +
                                    std::to_string(n) + ")");
    }
    require_finite(series, "decompose");

    const std::size_t m = static_cast<std::size_t>(period);
    const std::size_t half = m / 2;

    SeasonalDecomposition out;
    out.period = period;
    out.original = series;
    out.trend.assign(n, 0.0);
    out.seasonal.assign(n, 0.0);
    out.remainder.assign(n, 0.0);

    // Centered moving average; even windows take half weight at both ends.
    std::vector<bool> trend_valid(n, false);
    for (std::size_t t = half; t + half < n; ++t) {
        double acc = 0.0;
        if (m % 2 == 0) {
            acc += 0.5 * series[t - half];
            acc += 0.5 * series[t + half];
            for (std::size_t i = t - half + 1; i < t + half; ++i) acc += series[i];
        } else {
            for (std::size_t i = t - half; i <= t + half; ++i) acc += series[i];
        }
        out.trend[t] = acc / static_cast<double>(m);
        trend_valid[t] = true;
    }

    // Per-phase means of the detrended interior, re-centered to zero mean.
    std::vector<double> phase_sum(m, 0.0);
    std::vector<int> phase_count(m, 0);
    for (std::size_t t = 0; t < n; ++t) {
        if (!trend_valid[t]) continue;
        std::size_t phase = t % m;
        phase_sum[phase] += series[t] - out.trend[t];
        phase_count[phase] += 1;
    }
    std::vector<double> pattern(m, 0.0);
    for (std::size_t phase = 0; phase < m; ++phase) {
        if (phase_count[phase] > 0) {
            pattern[phase] = phase_sum[phase] / static_cast<double>(phase_count[phase]);
        }
    }
    double pattern_mean = 0.0;
    for (double v : pattern) pattern_mean += v;
    pattern_mean /= static_cast<double>(m);
    for (double& v : pattern) v -= pattern_mean;

    for (std::size_t t = 0; t < n; ++t) out.seasonal[t] = pattern[t % m];

    // Nearest-valid extension of the trend into both endpoint bands.
    std::size_t first_valid = half;
    std::size_t last_valid = n - 1 - half;
    for (std::size_t t = 0; t < first_valid; ++t) out.trend[t] = out.trend[first_valid];
    for (std::size_t t = last_valid + 1; t < n; ++t) out.trend[t] = out.trend[last_valid];

    for (std::size_t t = 0; t < n; ++t) {
        out.remainder[t] = series[t] - out.trend[t] - out.seasonal[t];
    }
    return out;
}

std::vector<double> deseasonalize(const std::vector<double>& series, std::optional<int> period) {
    if (!period.has_value()) return series;
    SeasonalDecomposition d = decompose(series, *period);
    std::vector<double> out(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) out[t] = series[t] - d.seasonal[t];
    return out;
}

std::string Periodogram::to_csv() const {
    std::string out = "frequency,period_months,power\n";
    for (std::size_t i = 0; i < power.size(); ++i) {
        out += format_double(frequencies[i]) + "," +
               format_double(1.0 / frequencies[i]) + "," + format_double(power[i]) + "\n";
    }
    return out;
}

std::string SeasonalDecomposition::to_csv() const {
    std::string out = "t,original,trend,seasonal,remainder\n";
    for (std::size_t t = 0; t < original.size(); ++t) {
        out += std::to_string(t) + "," + format_double(original[t]) + "," +
               format_double(trend[t]) + "," + format_double(seasonal[t]) + "," +
               format_double(remainder[t]) + "\n";
    }
    return out;
}

} // namespace nexus
