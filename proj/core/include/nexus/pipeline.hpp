#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nexus/cluster.hpp"
#include "nexus/dataset.hpp"
#include "nexus/evaluation.hpp"
#include "nexus/mvtboost.hpp"
#include "nexus/seasonal.hpp"

namespace nexus {

enum class RunMode { with_seasonality, deseasonalized, both };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& s);

// Everything needed to reproduce a run; a config plus the input files fully
// determines every emitted model and score table.
struct RunConfig {
    std::vector<std::string> inputs;
    std::string schema_path;          // empty = canonical column names
    std::vector<std::string> cities;  // empty = every city found
    RunMode mode = RunMode::both;
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    int folds = 5;
    TuningGrid grid;
    int top_m = 5;
    double influence_threshold = -1.0; // >= 0 switches selection to threshold rule
    DetectionParams detection;
    bool full_grid_periods = false;   // scan all representable periods
    GapPolicy gap_policy = GapPolicy::fail;
    int enso_lag = 0;
    bool time_blocked_folds = false;
    double alpha = 0.05;

    static RunConfig load(const std::string& path);
    // Key-sorted text rendering used for the manifest hash.
    std::string canonical_text() const;
};

// One modeling pass (one seasonality treatment) for one city.
struct ModeResult {
    std::string mode;
    MvBoostParams tuned;
    std::vector<int> selected;
    RelativeInfluence influence;
    ScoreReport full_report;
    ScoreReport reduced_report;
    std::vector<ScoreReport> univariate_reports; // one per response
    std::vector<Comparison> full_vs_reduced;     // per response
    std::vector<Comparison> reduced_vs_univariate;
    CovarianceExplainedMatrix covariance;
    std::vector<int> heat_row_order;
    std::vector<int> heat_col_order;
    BoostedEnsemble model_full;
    BoostedEnsemble model_reduced;
    std::vector<BoostedEnsemble> model_univariate;
};

struct CityResult {
    std::string city;
    std::vector<Periodogram> periodograms;          // per response
    std::vector<std::optional<int>> detected_periods;
    std::vector<ModeResult> modes;
};

struct CityManifestEntry {
    std::string city;
    bool ok = false;
    std::string diagnostic; // failing stage and reason when not ok
    std::vector<std::string> files;
};

struct RunManifest {
    std::string config_hash;
    std::string version;
    std::string started_at;
    std::string finished_at;
    std::vector<CityManifestEntry> cities;
    std::vector<std::string> run_files; // score tables and manifest-level outputs

    std::string to_json() const;
};

// Full per-city workflow: seasonality detection, optional removal, CV tuning,
// full fit, influence + variable selection, reduced fit and similarity check,
// univariate baselines, covariance attribution with clustered ordering.
// Throws with the failing stage named in the message.
CityResult run_city(const NexusDataset& ds, const RunConfig& cfg);

// Writes all report files for one computed city; returns relative paths.
std::vector<std::string> emit_city_reports(const CityResult& result, const RunConfig& cfg);

// Loads inputs, verifies the output directory is writable up front, runs all
// requested cities (a failing city is recorded and skipped), writes combined
// score tables and the manifest.
RunManifest run_all(const RunConfig& cfg);

std::uint64_t fnv1a_hash(const std::string& text);

} // namespace nexus
