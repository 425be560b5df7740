#include "nexus/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "nexus/errors.hpp"
#include "nexus/format.hpp"
#include "nexus/rng.hpp"
#include "nexus/stats.hpp"

namespace nexus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Stationary AR(1) with unit marginal variance.
std::vector<double> ar1_series(int n, double rho, Rng& rng) {
    std::vector<double> out(static_cast<std::size_t>(n));
    double innovation_scale = std::sqrt(std::max(1.0 - rho * rho, 1e-12));
    out[0] = rng.next_gaussian();
    for (int t = 1; t < n; ++t) {
        out[static_cast<std::size_t>(t)] =
            rho * out[static_cast<std::size_t>(t - 1)] + innovation_scale * rng.next_gaussian();
    }
    return out;
}

void validate_recipe(const ResponseRecipe& recipe, const char* name) {
    if (recipe.seasonal_period != 0 && recipe.seasonal_period != 6 &&
        recipe.seasonal_period != 12) {
        throw ConfigError(std::string("synthetic: ") + name +
                          " seasonal period must be 0, 6 or 12");
    }
    if (!recipe.coefficients.empty() &&
        recipe.coefficients.size() != kPredictorCount) {
        throw ConfigError(std::string("synthetic: ") + name + " needs " +
                          std::to_string(kPredictorCount) + " coefficients (or none)");
    }
    if (recipe.noise_stddev < 0.0) {
        throw ConfigError(std::string("synthetic: ") + name + " noise stddev must be >= 0");
    }
}

// Phase-anchored to the built-in climate cycles: the annual term peaks in
// July with temperature, the semiannual term peaks in both January and July.
// Demand seasonality that is out of phase with climate would be unlearnable
// from the predictors, which real usage data is not.
std::vector<double> seasonal_term(const ResponseRecipe& recipe, int n) {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    if (recipe.seasonal_period == 0 || recipe.seasonal_amplitude == 0.0) return out;
    double shift = recipe.seasonal_period == 12 ? 6.0 : 0.0;
    for (int t = 0; t < n; ++t) {
        out[static_cast<std::size_t>(t)] =
            recipe.seasonal_amplitude *
            std::cos(kTwoPi * (static_cast<double>(t) - shift) /
                     static_cast<double>(recipe.seasonal_period));
    }
    return out;
}

std::vector<int> active_set(const ResponseRecipe& recipe) {
    std::vector<int> out;
    for (std::size_t j = 0; j < recipe.coefficients.size(); ++j) {
        if (recipe.coefficients[j] != 0.0) out.push_back(static_cast<int>(j));
    }
    return out;
}

} // namespace

SyntheticCity generate(const SyntheticSpec& spec) {
    if (spec.n_months < 24) {
        throw ConfigError("synthetic: need at least 24 months, got " +
                          std::to_string(spec.n_months));
    }
    validate_recipe(spec.water, "water");
    validate_recipe(spec.electricity, "electricity");
    if (spec.start_month < 1 || spec.start_month > 12) {
        throw ConfigError("synthetic: start month outside [1,12]");
    }

    const int n = spec.n_months;
    Rng rng(spec.seed);

    // Predictor columns in the fixed order; temperature and humidity carry
    // annual cycles (July peak for temperature), wind and precipitation are
    // mostly autoregressive, ENSO is a slow AR(1).
    Matrix X(static_cast<std::size_t>(n), kPredictorCount);
    double sscale = spec.predictor_seasonal_scale;

    std::vector<double> a_temp = ar1_series(n, 0.7, rng);
    std::vector<double> a_dew = ar1_series(n, 0.7, rng);
    std::vector<double> a_maxrh = ar1_series(n, 0.6, rng);
    std::vector<double> a_avgrh = ar1_series(n, 0.6, rng);
    std::vector<double> a_maxw = ar1_series(n, 0.5, rng);
    std::vector<double> a_avgw = ar1_series(n, 0.5, rng);
    std::vector<double> a_prec = ar1_series(n, 0.4, rng);
    std::vector<double> a_enso = ar1_series(n, 0.9, rng);

    for (int t = 0; t < n; ++t) {
        std::size_t i = static_cast<std::size_t>(t);
        double annual = std::cos(kTwoPi * (static_cast<double>(t) - 6.0) / 12.0);

        double maxdb = 62.0 + 24.0 * sscale * annual + 5.0 * a_temp[i];
        double dew = maxdb - 14.0 - 5.0 * std::fabs(a_dew[i]);
        double maxrh = std::clamp(82.0 + 8.0 * a_maxrh[i], 0.0, 100.0);
        double avgrh = std::clamp(
            62.0 + 5.0 * sscale * std::cos(kTwoPi * (static_cast<double>(t) - 2.0) / 12.0) +
                9.0 * a_avgrh[i],
            0.0, 100.0);
        double maxw = std::max(20.0 + 4.0 * a_maxw[i], 0.5);
        double avgw = std::max(9.0 + 2.5 * a_avgw[i], 0.1);
        double prec = std::max(3.0 + 1.2 * a_prec[i], 0.0);
        double enso = 0.8 * a_enso[i];

        X(i, 0) = maxdb;
        X(i, 1) = dew;
        X(i, 2) = maxrh;
        X(i, 3) = avgrh;
        X(i, 4) = maxw;
        X(i, 5) = avgw;
        X(i, 6) = prec;
        X(i, 7) = enso;
    }

    // Responses load on standardized predictor deviations so coefficient
    // magnitudes are comparable across columns.
    Matrix Z(static_cast<std::size_t>(n), kPredictorCount);
    for (int j = 0; j < kPredictorCount; ++j) {
        std::vector<double> col = X.column(static_cast<std::size_t>(j));
        double mu = mean(col);
        double sd = sample_stddev(col);
        if (sd <= 0.0) sd = 1.0;
        for (int t = 0; t < n; ++t) {
            Z(static_cast<std::size_t>(t), static_cast<std::size_t>(j)) =
                (col[static_cast<std::size_t>(t)] - mu) / sd;
        }
    }

    SyntheticTruth truth;
    truth.latent = ar1_series(n, spec.latent_ar, rng);
    if (spec.latent_predictor_mix != 0.0) {
        double mix = spec.latent_predictor_mix;
        if (mix < 0.0 || mix > 1.0) {
            throw ConfigError("synthetic: latent_predictor_mix must be in [0,1]");
        }
        double noise_scale = std::sqrt(std::max(1.0 - mix * mix, 0.0));
        for (int t = 0; t < n; ++t) {
            std::size_t i = static_cast<std::size_t>(t);
            double blend = (Z(i, 2) + Z(i, 5)) / std::numbers::sqrt2;
            truth.latent[i] = mix * blend + noise_scale * truth.latent[i];
        }
    }
    truth.water_seasonal = seasonal_term(spec.water, n);
    truth.electricity_seasonal = seasonal_term(spec.electricity, n);
    truth.water_active = active_set(spec.water);
    truth.electricity_active = active_set(spec.electricity);

    auto build_response = [&](const ResponseRecipe& recipe,
                              const std::vector<double>& seasonal) {
        std::vector<double> out(static_cast<std::size_t>(n), recipe.intercept);
        for (int t = 0; t < n; ++t) {
            std::size_t i = static_cast<std::size_t>(t);
            for (std::size_t j = 0; j < recipe.coefficients.size(); ++j) {
                out[i] += recipe.coefficients[j] * Z(i, j);
            }
            out[i] += seasonal[i];
            out[i] += spec.coupling * truth.latent[i];
            out[i] += recipe.noise_stddev * rng.next_gaussian();
        }
        return out;
    };

    std::vector<double> water = build_response(spec.water, truth.water_seasonal);
    std::vector<double> electricity =
        build_response(spec.electricity, truth.electricity_seasonal);

    // Per-customer demand must stay non-negative; a constant lift keeps the
    // linear structure intact and is reported in the truth record.
    auto lift_nonnegative = [](std::vector<double>& v) {
        double lo = *std::min_element(v.begin(), v.end());
        if (lo >= 0.5) return 0.0;
        double shift = 0.5 - lo;
        for (double& x : v) x += shift;
        return shift;
    };
    truth.water_shift = lift_nonnegative(water);
    truth.electricity_shift = lift_nonnegative(electricity);

    SyntheticCity city;
    city.truth = std::move(truth);
    city.dataset.city_id = spec.city_id;
    city.dataset.X = std::move(X);
    city.dataset.Y = Matrix(static_cast<std::size_t>(n), kResponseCount);
    city.dataset.predictor_standardization.assign(kPredictorCount, std::nullopt);
    city.dataset.response_standardization.assign(kResponseCount, std::nullopt);

    MonthStamp stamp{spec.start_year, spec.start_month};
    for (int t = 0; t < n; ++t) {
        std::size_t i = static_cast<std::size_t>(t);
        city.dataset.timeline.push_back(stamp);
        stamp = stamp.next();
        city.dataset.Y(i, 0) = water[i];
        city.dataset.Y(i, 1) = electricity[i];
    }
    city.dataset.validate();
    return city;
}

std::string to_ingest_csv(const SyntheticCity& city) {
    const NexusDataset& ds = city.dataset;
    std::string out = "city,year,month";
    for (const char* name : kPredictorNames) out += std::string(",") + name;
    out += ",water_use,electricity_use,water_customers,electricity_customers\n";
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        out += csv_field(ds.city_id) + "," + std::to_string(ds.timeline[i].year) + "," +
               std::to_string(ds.timeline[i].month);
        for (int j = 0; j < kPredictorCount; ++j) {
            out += "," + format_double(ds.X(i, static_cast<std::size_t>(j)));
        }
        out += "," + format_double(ds.Y(i, 0) * city.water_customers);
        out += "," + format_double(ds.Y(i, 1) * city.electricity_customers);
        out += "," + format_double(city.water_customers);
        out += "," + format_double(city.electricity_customers);
        out += "\n";
    }
    return out;
}

void write_ingest_csv(const SyntheticCity& city, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << to_ingest_csv(city);
}

} // namespace nexus
