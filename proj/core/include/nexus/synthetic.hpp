#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nexus/dataset.hpp"

namespace nexus {

// Recipe for one generated response: a linear effect on the standardized
// predictor columns plus an exact sinusoidal seasonal term, a shared latent
// term, and gaussian noise.
struct ResponseRecipe {
    double intercept = 50.0;
    std::vector<double> coefficients; // one per predictor; empty means all zero
    double seasonal_amplitude = 0.0;
    int seasonal_period = 0; // 0 (none), 6 or 12
    double noise_stddev = 1.0;
};

struct SyntheticSpec {
    std::string city_id = "synthville";
    int n_months = 120;
    std::uint64_t seed = 1;
    int start_year = 2007;
    int start_month = 1;
    ResponseRecipe water;
    ResponseRecipe electricity;
    // Weight of the shared latent series added to both responses.
    double coupling = 0.0;
    double latent_ar = 0.8;
    // Fraction of the latent drawn from a fixed blend of the humidity and
    // wind columns; the rest is AR(1) noise. A climate-driven component makes
    // the coupled variation partly learnable, as in real demand data.
    double latent_predictor_mix = 0.0;
    // Scales the built-in annual cycles of the temperature/humidity columns;
    // 0 gives purely autoregressive predictors.
    double predictor_seasonal_scale = 1.0;
};

// Everything a test oracle needs: the exact seasonal terms, the active
// predictor sets, the latent series, and any positivity shift applied to the
// intercepts.
struct SyntheticTruth {
    std::vector<double> water_seasonal;
    std::vector<double> electricity_seasonal;
    std::vector<int> water_active;
    std::vector<int> electricity_active;
    std::vector<double> latent;
    double water_shift = 0.0;
    double electricity_shift = 0.0;
};

struct SyntheticCity {
    NexusDataset dataset;
    SyntheticTruth truth;
    // Powers of two so that emit/ingest round-trips are bit exact.
    double water_customers = 1024.0;
    double electricity_customers = 2048.0;
};

// Deterministic generation from (spec, seed); the same spec always yields a
// bit-identical dataset that passes full validation.
SyntheticCity generate(const SyntheticSpec& spec);

// The raw-usage CSV consumed by ingest_csv.
std::string to_ingest_csv(const SyntheticCity& city);
void write_ingest_csv(const SyntheticCity& city, const std::string& path);

} // namespace nexus
