#include "nexus/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include <json.hpp>

#include "nexus/boosting.hpp"
#include "nexus/errors.hpp"
#include "nexus/format.hpp"
#include "nexus/svg.hpp"

namespace fs = std::filesystem;

namespace nexus {

namespace {

constexpr const char* kVersion = "0.1.0";

template <typename F>
auto run_stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), "stage " + name + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error(Error::Kind::runtime, "stage " + name + ": " + e.what());
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    for (char c : s) {
        if (c == ',') {
            out.push_back(item);
            item.clear();
        } else {
            item += c;
        }
    }
    out.push_back(item);
    for (auto& v : out) {
        std::size_t a = v.find_first_not_of(" \t");
        if (a == std::string::npos) {
            v.clear();
            continue;
        }
        std::size_t b = v.find_last_not_of(" \t");
        v = v.substr(a, b - a + 1);
    }
    std::erase_if(out, [](const std::string& v) { return v.empty(); });
    return out;
}

template <typename T>
T parse_number(const std::string& s, const std::string& key) {
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("config key '" + key + "': cannot parse '" + s + "'");
    }
    return value;
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + s + "'");
}

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> predictor_labels() {
    return {kPredictorNames.begin(), kPredictorNames.end()};
}

std::vector<std::string> response_labels() {
    return {kResponseNames.begin(), kResponseNames.end()};
}

std::vector<int> rank_by_mean_influence(const RelativeInfluence& influence, int top_m,
                                        double threshold) {
    std::vector<double> avg = influence.averaged();
    std::vector<int> order(avg.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return avg[static_cast<std::size_t>(a)] > avg[static_cast<std::size_t>(b)];
    });
    if (threshold >= 0.0) {
        std::vector<int> keep;
        for (int j : order) {
            if (avg[static_cast<std::size_t>(j)] >= threshold) keep.push_back(j);
        }
        return keep;
    }
    if (top_m < 1 || static_cast<std::size_t>(top_m) > avg.size()) {
        throw ConfigError("variable selection: top_m must be in [1, " +
                          std::to_string(avg.size()) + "]");
    }
    return {order.begin(), order.begin() + top_m};
}

ModeResult run_mode(const NexusDataset& base,
                    const std::vector<std::optional<int>>& periods, RunMode mode,
                    const RunConfig& cfg) {
    ModeResult result;
    result.mode = to_string(mode);

    NexusDataset working = base;
    if (mode == RunMode::deseasonalized) {
        run_stage("deseasonalize", [&] {
            for (int k = 0; k < kResponseCount; ++k) {
                if (!periods[static_cast<std::size_t>(k)].has_value()) continue;
                std::vector<double> column =
                    deseasonalize(base.Y.column(static_cast<std::size_t>(k)),
                                  periods[static_cast<std::size_t>(k)]);
                working.Y.set_column(static_cast<std::size_t>(k), column);
            }
            return 0;
        });
    }
    working = run_stage("standardize-responses",
                        [&] { return standardize(working, StandardizeTarget::responses); });

    const Matrix& X = working.X;
    const Matrix& Y = working.Y;
    const std::size_t n = X.rows();

    FoldPlan plan = cfg.time_blocked_folds
                        ? make_time_blocked_folds(n, cfg.folds)
                        : make_folds(n, cfg.folds, cfg.seed);

    result.tuned = run_stage("tuning", [&] {
        return tune_hyperparameters(X, Y, cfg.grid, plan);
    });

    auto mv_fitter_with = [](const MvBoostParams& params) {
        return [params](const Matrix& XT, const Matrix& YT) {
            MvBoostParams p = params;
            p.response_count = static_cast<int>(YT.cols());
            return mvboost_fit(XT, YT, p);
        };
    };

    result.model_full = run_stage("full-fit", [&] { return mvboost_fit(X, Y, result.tuned); });
    result.influence = relative_influence(result.model_full, predictor_labels(),
                                          response_labels());
    result.full_report = run_stage("full-cv", [&] {
        return cross_validate(X, Y, mv_fitter_with(result.tuned), plan, response_labels());
    });

    result.selected = run_stage("variable-selection", [&] {
        return rank_by_mean_influence(result.influence, cfg.top_m, cfg.influence_threshold);
    });

    Matrix Xr = X.select_columns(result.selected);
    result.model_reduced =
        run_stage("reduced-fit", [&] { return mvboost_fit(Xr, Y, result.tuned); });
    result.reduced_report = run_stage("reduced-cv", [&] {
        return cross_validate(Xr, Y, mv_fitter_with(result.tuned), plan, response_labels());
    });
    result.full_vs_reduced =
        compare_models(result.full_report, result.reduced_report, cfg.alpha);

    // Univariate baselines on the same selected predictors and tuned settings.
    BoostParams uni;
    uni.n_iterations = result.tuned.n_iterations;
    uni.learning_rate = result.tuned.learning_rate;
    uni.tree = result.tuned.tree;
    run_stage("univariate-baselines", [&] {
        for (int k = 0; k < kResponseCount; ++k) {
            Matrix Yk(n, 1);
            Yk.set_column(0, Y.column(static_cast<std::size_t>(k)));
            auto fitter = [&uni](const Matrix& XT, const Matrix& YT) {
                return boost_fit(XT, YT.column(0), uni);
            };
            result.univariate_reports.push_back(cross_validate(
                Xr, Yk, fitter, plan, {response_labels()[static_cast<std::size_t>(k)]}));
            result.model_univariate.push_back(
                boost_fit(Xr, Y.column(static_cast<std::size_t>(k)), uni));
            result.reduced_vs_univariate.push_back(compare_fold_rmse(
                result.reduced_report.responses[static_cast<std::size_t>(k)].fold_rmse,
                result.univariate_reports.back().responses[0].fold_rmse, cfg.alpha));
        }
        return 0;
    });

    result.covariance = run_stage("covariance-attribution", [&] {
        return covariance_explained(result.model_full, X, Y, predictor_labels(),
                                    response_labels());
    });
    auto orders = run_stage("heat-map-clustering", [&] { return cluster_order(result.covariance); });
    result.heat_row_order = orders.first;
    result.heat_col_order = orders.second;
    return result;
}

nlohmann::json report_json(const ScoreReport& report) {
    return nlohmann::json::parse(report.to_json());
}

std::string mode_file_suffix(const std::string& mode) { return mode; }

} // namespace

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::with_seasonality: return "with_seasonality";
        case RunMode::deseasonalized: return "deseasonalized";
        case RunMode::both: return "both";
    }
    return "both";
}

RunMode run_mode_from_string(const std::string& s) {
    if (s == "with-seasonality" || s == "with_seasonality") return RunMode::with_seasonality;
    if (s == "deseasonalized") return RunMode::deseasonalized;
    if (s == "both") return RunMode::both;
    throw ConfigError("unknown mode '" + s + "' (expected with-seasonality, deseasonalized or both)");
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);

    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = line;
        std::size_t hash = t.find('#');
        if (hash != std::string::npos) t = t.substr(0, hash);
        std::size_t a = t.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + " line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        auto trim = [](std::string s) {
            std::size_t x = s.find_first_not_of(" \t\r");
            if (x == std::string::npos) return std::string();
            std::size_t y = s.find_last_not_of(" \t\r");
            return s.substr(x, y - x + 1);
        };
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));

        if (key == "input") {
            cfg.inputs = split_list(value);
        } else if (key == "schema") {
            cfg.schema_path = value;
        } else if (key == "cities") {
            cfg.cities = value == "all" ? std::vector<std::string>{} : split_list(value);
        } else if (key == "mode") {
            cfg.mode = run_mode_from_string(value);
        } else if (key == "seed") {
            cfg.seed = parse_number<std::uint64_t>(value, key);
        } else if (key == "out") {
            cfg.out_dir = value;
        } else if (key == "folds") {
            cfg.folds = parse_number<int>(value, key);
        } else if (key == "top_m") {
            cfg.top_m = parse_number<int>(value, key);
        } else if (key == "influence_threshold") {
            cfg.influence_threshold = parse_number<double>(value, key);
        } else if (key == "min_leaf") {
            cfg.grid.min_leaf = parse_number<int>(value, key);
        } else if (key == "grid.n_iterations") {
            cfg.grid.n_iterations.clear();
            for (const auto& v : split_list(value)) {
                cfg.grid.n_iterations.push_back(parse_number<int>(v, key));
            }
        } else if (key == "grid.learning_rate") {
            cfg.grid.learning_rates.clear();
            for (const auto& v : split_list(value)) {
                cfg.grid.learning_rates.push_back(parse_number<double>(v, key));
            }
        } else if (key == "grid.max_depth") {
            cfg.grid.max_depths.clear();
            for (const auto& v : split_list(value)) {
                cfg.grid.max_depths.push_back(parse_number<int>(v, key));
            }
        } else if (key == "candidate_periods") {
            cfg.detection.candidate_periods.clear();
            for (const auto& v : split_list(value)) {
                cfg.detection.candidate_periods.push_back(parse_number<int>(v, key));
            }
        } else if (key == "peak_threshold") {
            cfg.detection.peak_threshold = parse_number<double>(value, key);
        } else if (key == "full_grid_periods") {
            cfg.full_grid_periods = parse_bool(value, key);
        } else if (key == "gap_policy") {
            if (value == "fail") cfg.gap_policy = GapPolicy::fail;
            else if (value == "interpolate") cfg.gap_policy = GapPolicy::interpolate;
            else throw ConfigError("config key 'gap_policy': expected fail or interpolate");
        } else if (key == "enso_lag") {
            cfg.enso_lag = parse_number<int>(value, key);
        } else if (key == "time_blocked_folds") {
            cfg.time_blocked_folds = parse_bool(value, key);
        } else if (key == "alpha") {
            cfg.alpha = parse_number<double>(value, key);
        } else {
            throw ConfigError(path + " line " + std::to_string(line_no) + ": unknown key '" +
                              key + "'");
        }
    }
    return cfg;
}

std::string RunConfig::canonical_text() const {
    auto join_str = [](const std::vector<std::string>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
        return out;
    };
    auto join_int = [](const std::vector<int>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            out += (i ? "," : "") + std::to_string(v[i]);
        }
        return out;
    };
    auto join_dbl = [](const std::vector<double>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
        return out;
    };

    std::string out;
    out += "alpha=" + format_double(alpha) + "\n";
    out += "candidate_periods=" + join_int(detection.candidate_periods) + "\n";
    out += "cities=" + join_str(cities) + "\n";
    out += "enso_lag=" + std::to_string(enso_lag) + "\n";
    out += "folds=" + std::to_string(folds) + "\n";
    out += "full_grid_periods=" + std::string(full_grid_periods ? "true" : "false") + "\n";
    out += "gap_policy=" + std::string(gap_policy == GapPolicy::fail ? "fail" : "interpolate") + "\n";
    out += "grid.learning_rate=" + join_dbl(grid.learning_rates) + "\n";
    out += "grid.max_depth=" + join_int(grid.max_depths) + "\n";
    out += "grid.n_iterations=" + join_int(grid.n_iterations) + "\n";
    out += "influence_threshold=" + format_double(influence_threshold) + "\n";
    out += "input=" + join_str(inputs) + "\n";
    out += "min_leaf=" + std::to_string(grid.min_leaf) + "\n";
    out += "mode=" + to_string(mode) + "\n";
    out += "out=" + out_dir + "\n";
    out += "peak_threshold=" + format_double(detection.peak_threshold) + "\n";
    out += "schema=" + schema_path + "\n";
    out += "seed=" + std::to_string(seed) + "\n";
    out += "time_blocked_folds=" + std::string(time_blocked_folds ? "true" : "false") + "\n";
    out += "top_m=" + std::to_string(top_m) + "\n";
    return out;
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

CityResult run_city(const NexusDataset& ds, const RunConfig& cfg) {
    CityResult result;
    result.city = ds.city_id;

    NexusDataset base = run_stage("gap-handling", [&] { return handle_gaps(ds, cfg.gap_policy); });
    if (cfg.enso_lag > 0) {
        base = run_stage("enso-lag", [&] { return lag_enso(base, cfg.enso_lag); });
    }

    DetectionParams detection = cfg.detection;
    if (cfg.full_grid_periods) {
        detection.candidate_periods.clear();
        for (int p = 2; p <= static_cast<int>(base.n_rows()) / 2; ++p) {
            detection.candidate_periods.push_back(p);
        }
    }

    run_stage("seasonality-detection", [&] {
        for (int k = 0; k < kResponseCount; ++k) {
            Periodogram pg = periodogram(base.Y.column(static_cast<std::size_t>(k)));
            result.detected_periods.push_back(detect_seasonality(pg, detection));
            result.periodograms.push_back(std::move(pg));
        }
        return 0;
    });

    std::vector<RunMode> modes;
    if (cfg.mode == RunMode::both) {
        modes = {RunMode::with_seasonality, RunMode::deseasonalized};
    } else {
        modes = {cfg.mode};
    }
    for (RunMode mode : modes) {
        result.modes.push_back(run_mode(base, result.detected_periods, mode, cfg));
    }
    return result;
}

std::vector<std::string> emit_city_reports(const CityResult& result, const RunConfig& cfg) {
    fs::path city_dir = fs::path(cfg.out_dir) / result.city;
    std::error_code ec;
    fs::create_directories(city_dir, ec);
    if (ec) throw IoError("cannot create output directory " + city_dir.string());

    std::vector<std::string> files;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_file(city_dir / name, content);
        files.push_back(result.city + "/" + name);
    };

    std::vector<std::string> resp = response_labels();
    nlohmann::json seasonality;
    for (int k = 0; k < kResponseCount; ++k) {
        const auto& label = resp[static_cast<std::size_t>(k)];
        emit("periodogram_" + label + ".csv", result.periodograms[static_cast<std::size_t>(k)].to_csv());
        emit("periodogram_" + label + ".svg",
             periodogram_svg(result.periodograms[static_cast<std::size_t>(k)],
                             result.city + ": " + label + " periodogram",
                             cfg.detection.candidate_periods));
        const auto& period = result.detected_periods[static_cast<std::size_t>(k)];
        if (period.has_value()) seasonality[label] = *period;
        else seasonality[label] = nullptr;
    }
    emit("seasonality.json", seasonality.dump(2) + "\n");

    std::string summary = "city: " + result.city + "\n";
    for (int k = 0; k < kResponseCount; ++k) {
        const auto& period = result.detected_periods[static_cast<std::size_t>(k)];
        summary += "  " + resp[static_cast<std::size_t>(k)] + " seasonality: " +
                   (period.has_value() ? std::to_string(*period) + " months" : "none") + "\n";
    }

    for (const ModeResult& mode : result.modes) {
        const std::string suffix = mode_file_suffix(mode.mode);

        emit("influence_" + suffix + ".csv", mode.influence.to_csv());
        emit("influence_" + suffix + ".json", mode.influence.to_json() + "\n");
        emit("covariance_explained_" + suffix + ".csv", mode.covariance.to_csv());
        emit("covariance_explained_" + suffix + ".json", mode.covariance.to_json() + "\n");

        // reordered matrix + heat map
        Matrix reordered(mode.heat_row_order.size(), mode.heat_col_order.size());
        std::vector<std::string> row_labels;
        std::vector<std::string> col_labels;
        for (std::size_t i = 0; i < mode.heat_row_order.size(); ++i) {
            row_labels.push_back(
                mode.covariance.predictor_labels[static_cast<std::size_t>(mode.heat_row_order[i])]);
        }
        for (std::size_t j = 0; j < mode.heat_col_order.size(); ++j) {
            col_labels.push_back(
                mode.covariance.pair_labels[static_cast<std::size_t>(mode.heat_col_order[j])]);
        }
        for (std::size_t i = 0; i < reordered.rows(); ++i) {
            for (std::size_t j = 0; j < reordered.cols(); ++j) {
                reordered(i, j) =
                    mode.covariance.entries(static_cast<std::size_t>(mode.heat_row_order[i]),
                                            static_cast<std::size_t>(mode.heat_col_order[j]));
            }
        }
        std::string clustered_csv = "predictor";
        for (const auto& l : col_labels) clustered_csv += "," + csv_field(l);
        clustered_csv += "\n";
        for (std::size_t i = 0; i < reordered.rows(); ++i) {
            clustered_csv += csv_field(row_labels[i]);
            for (std::size_t j = 0; j < reordered.cols(); ++j) {
                clustered_csv += "," + format_double(reordered(i, j));
            }
            clustered_csv += "\n";
        }
        emit("covariance_explained_" + suffix + "_clustered.csv", clustered_csv);
        emit("heatmap_" + suffix + ".svg",
             heatmap_svg(reordered, row_labels, col_labels,
                         result.city + ": covariance explained (" + mode.mode + ")"));

        emit("model_full_" + suffix + ".json", ensemble_to_json(mode.model_full) + "\n");
        emit("model_reduced_" + suffix + ".json", ensemble_to_json(mode.model_reduced) + "\n");
        for (int k = 0; k < kResponseCount; ++k) {
            emit("model_univariate_" + resp[static_cast<std::size_t>(k)] + "_" + suffix + ".json",
                 ensemble_to_json(mode.model_univariate[static_cast<std::size_t>(k)]) + "\n");
        }

        nlohmann::json scores;
        scores["city"] = result.city;
        scores["mode"] = mode.mode;
        scores["tuned"] = {{"n_iterations", mode.tuned.n_iterations},
                           {"learning_rate", mode.tuned.learning_rate},
                           {"max_depth", mode.tuned.tree.max_depth},
                           {"min_leaf", mode.tuned.tree.min_leaf}};
        scores["selected_predictors"] = nlohmann::json::array();
        for (int j : mode.selected) {
            scores["selected_predictors"].push_back(kPredictorNames[static_cast<std::size_t>(j)]);
        }
        scores["full"] = report_json(mode.full_report);
        scores["reduced"] = report_json(mode.reduced_report);
        auto uni = nlohmann::json::array();
        for (const auto& r : mode.univariate_reports) uni.push_back(report_json(r));
        scores["univariate"] = uni;
        auto verdicts = nlohmann::json::object();
        for (int k = 0; k < kResponseCount; ++k) {
            verdicts[resp[static_cast<std::size_t>(k)]] = {
                {"full_vs_reduced", to_string(mode.full_vs_reduced[static_cast<std::size_t>(k)])},
                {"reduced_vs_univariate",
                 to_string(mode.reduced_vs_univariate[static_cast<std::size_t>(k)])}};
        }
        scores["verdicts"] = verdicts;
        emit("scores_" + suffix + ".json", scores.dump(2) + "\n");

        summary += "mode " + mode.mode + ":\n";
        summary += "  tuned: n_iterations=" + std::to_string(mode.tuned.n_iterations) +
                   " learning_rate=" + format_double(mode.tuned.learning_rate) +
                   " max_depth=" + std::to_string(mode.tuned.tree.max_depth) + "\n";
        summary += "  selected predictors (influence order):";
        for (int j : mode.selected) {
            summary += std::string(" ") + kPredictorNames[static_cast<std::size_t>(j)];
        }
        summary += "\n";
        for (int k = 0; k < kResponseCount; ++k) {
            const auto& score = mode.reduced_report.responses[static_cast<std::size_t>(k)];
            char line[160];
            std::snprintf(line, sizeof(line), "  %s: R2=%.4f RMSE=%.4f (final model)\n",
                          score.response.c_str(), score.r2, score.rmse);
            summary += line;
        }
        for (int k = 0; k < kResponseCount; ++k) {
            summary += "  " + resp[static_cast<std::size_t>(k)] + " full-vs-reduced: " +
                       to_string(mode.full_vs_reduced[static_cast<std::size_t>(k)]) +
                       ", reduced-vs-univariate: " +
                       to_string(mode.reduced_vs_univariate[static_cast<std::size_t>(k)]) + "\n";
        }
    }
    emit("summary.txt", summary);
    return files;
}

RunManifest run_all(const RunConfig& cfg) {
    RunManifest manifest;
    manifest.version = kVersion;
    manifest.started_at = now_iso8601();
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(cfg.canonical_text())));
    manifest.config_hash = hash_hex;

    // The output directory must be writable before any computation starts.
    fs::path out_dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.out_dir);
    {
        fs::path probe = out_dir / ".write_probe";
        std::ofstream f(probe);
        if (!f) throw IoError("output directory not writable: " + cfg.out_dir);
        f.close();
        fs::remove(probe, ec);
    }

    Schema schema = cfg.schema_path.empty() ? Schema::identity() : Schema::load(cfg.schema_path);

    std::vector<NexusDataset> datasets;
    for (const std::string& input : cfg.inputs) {
        std::vector<NexusDataset> found = ingest_csv_cities(input, schema);
        for (auto& ds : found) datasets.push_back(std::move(ds));
    }

    if (!cfg.cities.empty()) {
        std::vector<NexusDataset> filtered;
        for (const std::string& wanted : cfg.cities) {
            auto it = std::find_if(datasets.begin(), datasets.end(),
                                   [&](const NexusDataset& d) { return d.city_id == wanted; });
            if (it == datasets.end()) {
                throw ConfigError("requested city '" + wanted + "' not present in inputs");
            }
            filtered.push_back(std::move(*it));
        }
        datasets = std::move(filtered);
    }

    std::vector<CityResult> results;
    for (const NexusDataset& ds : datasets) {
        CityManifestEntry entry;
        entry.city = ds.city_id;
        try {
            CityResult result = run_city(ds, cfg);
            entry.files = emit_city_reports(result, cfg);
            entry.ok = true;
            for (const ModeResult& mode : result.modes) {
                for (int k = 0; k < kResponseCount; ++k) {
                    if (mode.full_vs_reduced[static_cast<std::size_t>(k)] != Comparison::similar) {
                        std::cerr << "warning: " << ds.city_id << " (" << mode.mode << "): reduced model not similar to full model for "
                                  << kResponseNames[static_cast<std::size_t>(k)] << "\n";
                    }
                }
            }
            results.push_back(std::move(result));
        } catch (const Error& e) {
            entry.ok = false;
            entry.diagnostic = e.what();
            std::cerr << "error: city " << ds.city_id << " aborted: " << e.what() << "\n";
        }
        manifest.cities.push_back(std::move(entry));
    }

    // Combined score tables, one row per city (final reduced model), plus the
    // univariate comparison table.
    std::vector<std::string> suffixes;
    if (cfg.mode == RunMode::both) suffixes = {"with_seasonality", "deseasonalized"};
    else suffixes = {to_string(cfg.mode)};

    for (const std::string& suffix : suffixes) {
        if (results.empty()) break;
        std::string table = "city,water_r2,water_rmse,electricity_r2,electricity_rmse\n";
        std::string uni_table = "city,water_r2,electricity_r2\n";
        nlohmann::json json_rows = nlohmann::json::array();
        nlohmann::json uni_rows = nlohmann::json::array();
        for (const CityResult& result : results) {
            const ModeResult* mode = nullptr;
            for (const ModeResult& m : result.modes) {
                if (m.mode == suffix) mode = &m;
            }
            if (mode == nullptr) continue;
            const auto& water = mode->reduced_report.responses[0];
            const auto& electricity = mode->reduced_report.responses[1];
            table += csv_field(result.city) + "," + format_double(water.r2) + "," +
                     format_double(water.rmse) + "," + format_double(electricity.r2) + "," +
                     format_double(electricity.rmse) + "\n";
            json_rows.push_back({{"city", result.city},
                                 {"water_r2", water.r2},
                                 {"water_rmse", water.rmse},
                                 {"electricity_r2", electricity.r2},
                                 {"electricity_rmse", electricity.rmse}});
            const auto& uw = mode->univariate_reports[0].responses[0];
            const auto& ue = mode->univariate_reports[1].responses[0];
            uni_table += csv_field(result.city) + "," + format_double(uw.r2) + "," +
                         format_double(ue.r2) + "\n";
            uni_rows.push_back({{"city", result.city},
                                {"water_r2", uw.r2},
                                {"electricity_r2", ue.r2}});
        }
        write_file(out_dir / ("scores_" + suffix + ".csv"), table);
        manifest.run_files.push_back("scores_" + suffix + ".csv");
        write_file(out_dir / ("scores_" + suffix + ".json"), json_rows.dump(2) + "\n");
        manifest.run_files.push_back("scores_" + suffix + ".json");
        write_file(out_dir / ("scores_univariate_" + suffix + ".csv"), uni_table);
        manifest.run_files.push_back("scores_univariate_" + suffix + ".csv");
        write_file(out_dir / ("scores_univariate_" + suffix + ".json"), uni_rows.dump(2) + "\n");
        manifest.run_files.push_back("scores_univariate_" + suffix + ".json");
    }

    manifest.finished_at = now_iso8601();
    manifest.run_files.push_back("manifest.json");
    write_file(out_dir / "manifest.json", manifest.to_json() + "\n");
    return manifest;
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["version"] = version;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    auto cities_json = nlohmann::json::array();
    for (const CityManifestEntry& c : cities) {
        nlohmann::json e;
        e["city"] = c.city;
        e["ok"] = c.ok;
        if (!c.ok) e["diagnostic"] = c.diagnostic;
        e["files"] = c.files;
        cities_json.push_back(e);
    }
    j["cities"] = cities_json;
    j["run_files"] = run_files;
    return j.dump(2);
}

} // namespace nexus
