// Command-line front end: ingest/validate city CSVs, test for seasonality,
// fit and evaluate demand models, generate synthetic cities, or run the whole
// per-city workflow.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nexus/boosting.hpp"
#include "nexus/dataset.hpp"
#include "nexus/errors.hpp"
#include "nexus/evaluation.hpp"
#include "nexus/format.hpp"
#include "nexus/mvtboost.hpp"
#include "nexus/pipeline.hpp"
#include "nexus/seasonal.hpp"
#include "nexus/svg.hpp"
#include "nexus/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string input;
    std::string schema;
    std::string out = "out";
};

nexus::Schema load_schema(const std::string& path) {
    return path.empty() ? nexus::Schema::identity() : nexus::Schema::load(path);
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw nexus::IoError("cannot write " + path.string());
    f << content;
}

std::vector<std::string> predictor_labels() {
    return {nexus::kPredictorNames.begin(), nexus::kPredictorNames.end()};
}

std::vector<std::string> response_labels() {
    return {nexus::kResponseNames.begin(), nexus::kResponseNames.end()};
}

int cmd_ingest(const CommonArgs& args, const std::string& gap_policy) {
    nexus::Schema schema = load_schema(args.schema);
    std::vector<nexus::NexusDataset> datasets = nexus::ingest_csv_cities(args.input, schema);
    fs::create_directories(args.out);
    for (nexus::NexusDataset& ds : datasets) {
        if (gap_policy == "interpolate") {
            ds = nexus::handle_gaps(ds, nexus::GapPolicy::interpolate);
        } else {
            ds = nexus::handle_gaps(ds, nexus::GapPolicy::fail);
        }
        fs::path out = fs::path(args.out) / (ds.city_id + "_normalized.csv");
        write_text(out, ds.to_csv());
        std::cout << ds.city_id << ": " << ds.n_rows() << " months ("
                  << ds.timeline.front().to_string() << " .. "
                  << ds.timeline.back().to_string() << ")";
        if (!ds.interpolated_months.empty()) {
            std::cout << ", " << ds.interpolated_months.size() << " interpolated";
        }
        std::cout << " -> " << out.string() << "\n";
    }
    return 0;
}

int cmd_detect(const CommonArgs& args, double threshold, std::vector<int> periods,
               bool full_grid) {
    nexus::Schema schema = load_schema(args.schema);
    std::vector<nexus::NexusDataset> datasets = nexus::ingest_csv_cities(args.input, schema);
    fs::create_directories(args.out);

    for (const nexus::NexusDataset& ds : datasets) {
        nexus::DetectionParams params;
        params.peak_threshold = threshold;
        if (full_grid) {
            params.candidate_periods.clear();
            for (int p = 2; p <= static_cast<int>(ds.n_rows()) / 2; ++p) {
                params.candidate_periods.push_back(p);
            }
        } else if (!periods.empty()) {
            params.candidate_periods = periods;
        }

        nlohmann::json out_json;
        for (int k = 0; k < nexus::kResponseCount; ++k) {
            std::string label = response_labels()[static_cast<std::size_t>(k)];
            nexus::Periodogram pg = nexus::periodogram(ds.Y.column(static_cast<std::size_t>(k)));
            std::optional<int> period = nexus::detect_seasonality(pg, params);
            write_text(fs::path(args.out) / (ds.city_id + "_periodogram_" + label + ".csv"),
                       pg.to_csv());
            write_text(fs::path(args.out) / (ds.city_id + "_periodogram_" + label + ".svg"),
                       nexus::periodogram_svg(pg, ds.city_id + ": " + label,
                                              full_grid ? std::vector<int>{6, 12}
                                                        : params.candidate_periods));
            if (period.has_value()) out_json[label] = *period;
            else out_json[label] = nullptr;
            std::cout << ds.city_id << " " << label << ": "
                      << (period.has_value() ? std::to_string(*period) + "-month seasonality"
                                             : "no seasonality detected")
                      << "\n";
        }
        write_text(fs::path(args.out) / (ds.city_id + "_seasonality.json"),
                   out_json.dump(2) + "\n");
    }
    return 0;
}

int cmd_synth(const std::string& out_dir, const std::string& name, std::uint64_t seed,
              int months, const std::string& preset, double coupling) {
    nexus::SyntheticSpec spec;
    spec.city_id = name;
    spec.seed = seed;
    spec.n_months = months;

    if (preset == "coupled") {
        spec.water.coefficients = {0.8, 0.0, 0.0, 0.9, 0.0, 0.4, 0.0, 0.7};
        spec.water.seasonal_amplitude = 2.0;
        spec.water.seasonal_period = 12;
        spec.water.noise_stddev = 0.6;
        spec.electricity.coefficients = {0.9, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.6};
        spec.electricity.seasonal_amplitude = 1.5;
        spec.electricity.seasonal_period = 6;
        spec.electricity.noise_stddev = 0.6;
        spec.coupling = coupling != 0.0 ? coupling : 0.8;
    } else if (preset == "seasonal") {
        spec.water.coefficients = {0.6, 0.0, 0.0, 0.6, 0.0, 0.0, 0.0, 0.0};
        spec.water.seasonal_amplitude = 3.0;
        spec.water.seasonal_period = 12;
        spec.water.noise_stddev = 0.5;
        spec.electricity.coefficients = {0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
        spec.electricity.seasonal_amplitude = 2.0;
        spec.electricity.seasonal_period = 6;
        spec.electricity.noise_stddev = 0.5;
        spec.coupling = coupling;
    } else if (preset == "independent") {
        spec.water.coefficients = {0.0, 0.0, 0.9, 0.0, 0.0, 0.0, 0.8, 0.0};
        spec.water.noise_stddev = 0.5;
        spec.electricity.coefficients = {0.9, 0.0, 0.0, 0.0, 0.6, 0.0, 0.0, 0.0};
        spec.electricity.noise_stddev = 0.5;
        spec.predictor_seasonal_scale = 0.0;
        spec.coupling = 0.0;
    } else {
        throw nexus::ConfigError("unknown preset '" + preset +
                                 "' (expected coupled, seasonal or independent)");
    }

    nexus::SyntheticCity city = nexus::generate(spec);
    fs::create_directories(out_dir);
    fs::path csv_path = fs::path(out_dir) / (name + ".csv");
    nexus::write_ingest_csv(city, csv_path.string());

    nlohmann::json truth;
    truth["seed"] = seed;
    truth["preset"] = preset;
    truth["coupling"] = spec.coupling;
    truth["water_active_predictors"] = city.truth.water_active;
    truth["electricity_active_predictors"] = city.truth.electricity_active;
    truth["water_seasonal_period"] = spec.water.seasonal_period;
    truth["electricity_seasonal_period"] = spec.electricity.seasonal_period;
    write_text(fs::path(out_dir) / (name + "_truth.json"), truth.dump(2) + "\n");

    std::cout << "wrote " << csv_path.string() << " (" << months << " months, preset "
              << preset << ")\n";
    return 0;
}

// Tune + fit the full multivariate model per city/mode; emit model and
// influence files.
int cmd_fit(const nexus::RunConfig& cfg) {
    nexus::Schema schema =
        cfg.schema_path.empty() ? nexus::Schema::identity() : nexus::Schema::load(cfg.schema_path);
    fs::create_directories(cfg.out_dir);

    for (const std::string& input : cfg.inputs) {
        for (const nexus::NexusDataset& raw : nexus::ingest_csv_cities(input, schema)) {
            nexus::CityResult result = nexus::run_city(raw, cfg);
            for (const nexus::ModeResult& mode : result.modes) {
                fs::path dir = fs::path(cfg.out_dir) / result.city;
                fs::create_directories(dir);
                write_text(dir / ("model_full_" + mode.mode + ".json"),
                           nexus::ensemble_to_json(mode.model_full) + "\n");
                write_text(dir / ("influence_" + mode.mode + ".csv"), mode.influence.to_csv());
                std::cout << result.city << " (" << mode.mode << "): fitted "
                          << mode.model_full.stages.size() << " stages, n_iterations="
                          << mode.tuned.n_iterations
                          << " learning_rate=" << nexus::format_double(mode.tuned.learning_rate)
                          << " max_depth=" << mode.tuned.tree.max_depth << "\n";
            }
        }
    }
    return 0;
}

int cmd_evaluate(const nexus::RunConfig& cfg) {
    nexus::Schema schema =
        cfg.schema_path.empty() ? nexus::Schema::identity() : nexus::Schema::load(cfg.schema_path);
    fs::create_directories(cfg.out_dir);

    std::vector<std::string> suffixes;
    if (cfg.mode == nexus::RunMode::both) suffixes = {"with_seasonality", "deseasonalized"};
    else suffixes = {nexus::to_string(cfg.mode)};

    std::vector<nexus::CityResult> results;
    for (const std::string& input : cfg.inputs) {
        for (const nexus::NexusDataset& raw : nexus::ingest_csv_cities(input, schema)) {
            results.push_back(nexus::run_city(raw, cfg));
        }
    }

    for (const std::string& suffix : suffixes) {
        std::string table = "city,model,water_r2,water_rmse,electricity_r2,electricity_rmse\n";
        for (const nexus::CityResult& result : results) {
            for (const nexus::ModeResult& mode : result.modes) {
                if (mode.mode != suffix) continue;
                auto row = [&](const std::string& label, const nexus::ScoreReport& report) {
                    table += nexus::csv_field(result.city) + "," + label;
                    for (const auto& r : report.responses) {
                        table += "," + nexus::format_double(r.r2) + "," +
                                 nexus::format_double(r.rmse);
                    }
                    table += "\n";
                };
                row("full", mode.full_report);
                row("reduced", mode.reduced_report);
                table += nexus::csv_field(result.city) + ",univariate";
                for (const auto& rep : mode.univariate_reports) {
                    table += "," + nexus::format_double(rep.responses[0].r2) + "," +
                             nexus::format_double(rep.responses[0].rmse);
                }
                table += "\n";
            }
        }
        fs::path path = fs::path(cfg.out_dir) / ("evaluation_" + suffix + ".csv");
        write_text(path, table);
        std::cout << "wrote " << path.string() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coupled water-electricity demand modeling"};
    app.require_subcommand(1);

    CommonArgs ingest_args;
    std::string ingest_gaps = "fail";
    CLI::App* ingest = app.add_subcommand("ingest", "validate and normalize city CSV data");
    ingest->add_option("--input", ingest_args.input, "input CSV path")->required();
    ingest->add_option("--schema", ingest_args.schema, "schema file (canonical = header lines)");
    ingest->add_option("--out", ingest_args.out, "output directory");
    ingest->add_option("--gap-policy", ingest_gaps, "fail | interpolate");

    CommonArgs detect_args;
    double detect_threshold = 10.0;
    std::vector<int> detect_periods;
    bool detect_full_grid = false;
    CLI::App* detect =
        app.add_subcommand("detect-seasonality", "periodograms and seasonality tests");
    detect->add_option("--input", detect_args.input, "input CSV path")->required();
    detect->add_option("--schema", detect_args.schema, "schema file");
    detect->add_option("--out", detect_args.out, "output directory");
    detect->add_option("--threshold", detect_threshold, "peak-to-median detection threshold");
    detect->add_option("--periods", detect_periods, "candidate periods in months");
    detect->add_flag("--full-grid", detect_full_grid, "scan every representable period");

    std::string synth_out = "out";
    std::string synth_name = "synthville";
    std::uint64_t synth_seed = 1;
    int synth_months = 120;
    std::string synth_preset = "coupled";
    double synth_coupling = 0.0;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic city CSV");
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--name", synth_name, "city name");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--months", synth_months, "number of months");
    synth->add_option("--preset", synth_preset, "coupled | seasonal | independent");
    synth->add_option("--coupling", synth_coupling, "override the shared latent weight");

    std::string fit_config;
    CLI::App* fit = app.add_subcommand("fit", "tune and fit full multivariate models");
    fit->add_option("--config", fit_config, "run config file")->required();

    std::string eval_config;
    CLI::App* evaluate = app.add_subcommand("evaluate", "cross-validated score tables");
    evaluate->add_option("--config", eval_config, "run config file")->required();

    std::string run_config;
    std::string run_mode_flag;
    std::string run_out_flag;
    std::uint64_t run_seed_flag = 0;
    bool run_seed_set = false;
    CLI::App* run = app.add_subcommand("run-all", "full workflow for every configured city");
    run->add_option("--config", run_config, "run config file")->required();
    run->add_option("--mode", run_mode_flag, "with-seasonality | deseasonalized | both");
    run->add_option("--out", run_out_flag, "output directory override");
    run->add_option("--seed", run_seed_flag, "fold seed override")
        ->each([&](const std::string&) { run_seed_set = true; });

    try {
        app.parse(argc, argv);

        if (*ingest) return cmd_ingest(ingest_args, ingest_gaps);
        if (*detect) {
            return cmd_detect(detect_args, detect_threshold, detect_periods, detect_full_grid);
        }
        if (*synth) {
            return cmd_synth(synth_out, synth_name, synth_seed, synth_months, synth_preset,
                             synth_coupling);
        }
        if (*fit) return cmd_fit(nexus::RunConfig::load(fit_config));
        if (*evaluate) return cmd_evaluate(nexus::RunConfig::load(eval_config));
        if (*run) {
            nexus::RunConfig cfg = nexus::RunConfig::load(run_config);
            if (!run_mode_flag.empty()) cfg.mode = nexus::run_mode_from_string(run_mode_flag);
            if (!run_out_flag.empty()) cfg.out_dir = run_out_flag;
            if (run_seed_set) cfg.seed = run_seed_flag;
            nexus::RunManifest manifest = nexus::run_all(cfg);
            std::size_t ok = 0;
            for (const auto& c : manifest.cities) ok += c.ok ? 1 : 0;
            std::cout << "completed " << ok << "/" << manifest.cities.size()
                      << " cities -> " << cfg.out_dir << "/manifest.json\n";
            for (const auto& c : manifest.cities) {
                if (!c.ok) std::cerr << "  failed: " << c.city << ": " << c.diagnostic << "\n";
            }
            return ok == manifest.cities.size() ? 0 : 3;
        }
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const nexus::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == nexus::Error::Kind::input ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
