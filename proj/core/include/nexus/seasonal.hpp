#pragma once

#include <optional>
#include <string>
#include <vector>

namespace nexus {

// Power spectrum of the mean-removed, linearly detrended series at Fourier
// frequencies k/n, k = 1..floor(n/2). Powers are squared unitary-DFT
// magnitudes scaled by 2/n (Nyquist term unhalved), so they sum to the
// variance of the detrended series.
struct Periodogram {
    std::vector<double> frequencies;
    std::vector<double> power;
    int series_length = 0;

    std::string to_csv() const;
};

// Additive split: trend + seasonal + remainder = original. The seasonal
// component is exactly periodic and zero-mean over each cycle; when period is
// absent it is the zero vector.
struct SeasonalDecomposition {
    std::optional<int> period;
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> remainder;
    std::vector<double> original;

    std::string to_csv() const;
};

struct DetectionParams {
    std::vector<int> candidate_periods = {6, 12};
    double peak_threshold = 10.0; // peak-to-median power ratio
    // Below this total power the series is numerically constant and no
    // period is reported.
    double min_total_power = 1e-18;
};

Periodogram periodogram(const std::vector<double>& series);

// Peak-to-median test at the candidate bins: returns the candidate with the
// highest bin power provided it reaches threshold x median over all bins.
std::optional<int> detect_seasonality(const Periodogram& pg, const DetectionParams& params = {});

// Classical additive decomposition: centered moving average trend (half-weight
// endpoints for even windows), per-phase means re-centered to zero, trend
// endpoints extended with the nearest valid value before the remainder is
// formed.
SeasonalDecomposition decompose(const std::vector<double>& series, int period);

// series minus its seasonal component; identity when period is absent.
std::vector<double> deseasonalize(const std::vector<double>& series, std::optional<int> period);

} // namespace nexus
