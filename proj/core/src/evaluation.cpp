#include "nexus/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "nexus/errors.hpp"
#include "nexus/rng.hpp"
#include "nexus/stats.hpp"

namespace nexus {

FoldPlan make_folds(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("make_folds: need at least 2 folds");
    if (n < static_cast<std::size_t>(k)) {
        throw ConfigError("make_folds: more folds than rows");
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    shuffle(order, rng);

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(n, 0);

    std::size_t base = n / static_cast<std::size_t>(k);
    std::size_t remainder = n % static_cast<std::size_t>(k);
    std::size_t at = 0;
    for (int fold = 0; fold < k; ++fold) {
        std::size_t size = base + (static_cast<std::size_t>(fold) < remainder ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) {
            plan.assignments[static_cast<std::size_t>(order[at++])] = fold;
        }
    }
    return plan;
}

FoldPlan make_time_blocked_folds(std::size_t n, int k) {
    if (k < 2) throw ConfigError("make_time_blocked_folds: need at least 2 folds");
    if (n < static_cast<std::size_t>(k)) {
        throw ConfigError("make_time_blocked_folds: more folds than rows");
    }
    FoldPlan plan;
    plan.k = k;
    plan.seed = 0;
    plan.assignments.assign(n, 0);
    std::size_t base = n / static_cast<std::size_t>(k);
    std::size_t remainder = n % static_cast<std::size_t>(k);
    std::size_t at = 0;
    for (int fold = 0; fold < k; ++fold) {
        std::size_t size = base + (static_cast<std::size_t>(fold) < remainder ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) plan.assignments[at++] = fold;
    }
    return plan;
}

double rmse(const std::vector<double>& pred, const std::vector<double>& obs) {
    if (pred.size() != obs.size()) throw ShapeError("rmse: length mismatch");
    if (pred.empty()) throw InsufficientDataError("rmse: empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - obs[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

double r_squared(const std::vector<double>& pred, const std::vector<double>& obs) {
    if (pred.size() != obs.size()) throw ShapeError("r_squared: length mismatch");
    if (pred.size() < 2) throw InsufficientDataError("r_squared: need at least 2 points");
    double obs_mean = mean(obs);
    double sse = 0.0;
    double sst = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sse += (obs[i] - pred[i]) * (obs[i] - pred[i]);
        sst += (obs[i] - obs_mean) * (obs[i] - obs_mean);
    }
    if (sst <= 0.0) throw DegenerateDataError("r_squared: observations have zero variance");
    return 1.0 - sse / sst;
}

ScoreReport cross_validate(const Matrix& X, const Matrix& Y, const ModelFitter& fitter,
                           const FoldPlan& plan, std::vector<std::string> response_labels) {
    const std::size_t n = X.rows();
    const std::size_t q = Y.cols();
    if (Y.rows() != n) throw ShapeError("cross_validate: X and Y row counts differ");
    if (plan.assignments.size() != n) throw ShapeError("cross_validate: fold plan size mismatch");
    if (response_labels.empty()) {
        for (std::size_t k = 0; k < q; ++k) response_labels.push_back("y" + std::to_string(k));
    }

    Matrix pooled(n, q);
    std::vector<std::vector<std::vector<double>>> fold_pred(
        static_cast<std::size_t>(plan.k), std::vector<std::vector<double>>(q));
    std::vector<std::vector<std::vector<double>>> fold_obs(
        static_cast<std::size_t>(plan.k), std::vector<std::vector<double>>(q));

    for (int fold = 0; fold < plan.k; ++fold) {
        std::vector<int> train_rows;
        std::vector<int> test_rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (plan.assignments[i] == fold) test_rows.push_back(static_cast<int>(i));
            else train_rows.push_back(static_cast<int>(i));
        }
        if (train_rows.size() < 2) {
            throw InsufficientDataError("cross_validate: fold " + std::to_string(fold) +
                                        " leaves fewer than 2 training rows");
        }

        BoostedEnsemble model = fitter(X.select_rows(train_rows), Y.select_rows(train_rows));
        Matrix pred = boost_predict(model, X.select_rows(test_rows));
        for (std::size_t t = 0; t < test_rows.size(); ++t) {
            for (std::size_t c = 0; c < q; ++c) {
                double value = pred(t, c);
                pooled(static_cast<std::size_t>(test_rows[t]), c) = value;
                fold_pred[static_cast<std::size_t>(fold)][c].push_back(value);
                fold_obs[static_cast<std::size_t>(fold)][c].push_back(
                    Y(static_cast<std::size_t>(test_rows[t]), c));
            }
        }
    }

    ScoreReport report;
    report.plan = plan;
    for (std::size_t c = 0; c < q; ++c) {
        ResponseScore score;
        score.response = response_labels[c];
        std::vector<double> pred_col = pooled.column(c);
        std::vector<double> obs_col = Y.column(c);
        score.rmse = rmse(pred_col, obs_col);
        score.r2 = r_squared(pred_col, obs_col);
        for (int fold = 0; fold < plan.k; ++fold) {
            const auto& fp = fold_pred[static_cast<std::size_t>(fold)][c];
            const auto& fo = fold_obs[static_cast<std::size_t>(fold)][c];
            score.fold_rmse.push_back(rmse(fp, fo));
            double fold_sst = 0.0;
            double fo_mean = mean(fo);
            for (double v : fo) fold_sst += (v - fo_mean) * (v - fo_mean);
            score.fold_r2.push_back(fold_sst > 0.0 ? r_squared(fp, fo)
                                                   : std::nan(""));
        }
        report.responses.push_back(std::move(score));
    }
    return report;
}

std::vector<int> select_variables(const Matrix& X, const Matrix& Y,
                                  const MvBoostParams& params, const SelectionRule& rule) {
    const int p = static_cast<int>(X.cols());
    bool use_threshold = rule.influence_threshold >= 0.0;
    if (!use_threshold && (rule.top_m < 1 || rule.top_m > p)) {
        throw ConfigError("select_variables: top_m must be in [1, " + std::to_string(p) + "]");
    }

    BoostedEnsemble model = mvboost_fit(X, Y, params);
    std::vector<double> avg = relative_influence(model).averaged();

    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return avg[static_cast<std::size_t>(a)] > avg[static_cast<std::size_t>(b)];
    });

    std::vector<int> selected;
    if (use_threshold) {
        for (int j : order) {
            if (avg[static_cast<std::size_t>(j)] >= rule.influence_threshold) {
                selected.push_back(j);
            }
        }
    } else {
        selected.assign(order.begin(), order.begin() + rule.top_m);
    }
    return selected;
}

std::string to_string(Comparison c) {
    switch (c) {
        case Comparison::similar: return "similar";
        case Comparison::a_better: return "a_better";
        case Comparison::b_better: return "b_better";
    }
    return "similar";
}

Comparison compare_fold_rmse(const std::vector<double>& a, const std::vector<double>& b,
                             double alpha) {
    if (a.size() != b.size()) throw ShapeError("compare_fold_rmse: fold count mismatch");
    if (a.size() < 2) throw InsufficientDataError("compare_fold_rmse: need at least 2 folds");

    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];

    double d_mean = mean(diff);
    double d_sd = sample_stddev(diff);

    if (d_sd == 0.0) {
        if (d_mean == 0.0) return Comparison::similar;
        return d_mean < 0.0 ? Comparison::a_better : Comparison::b_better;
    }

    double t = d_mean / (d_sd / std::sqrt(static_cast<double>(diff.size())));
    double p = student_t_two_sided_p(t, static_cast<double>(diff.size() - 1));
    if (p >= alpha) return Comparison::similar;
    return d_mean < 0.0 ? Comparison::a_better : Comparison::b_better;
}

std::vector<Comparison> compare_models(const ScoreReport& a, const ScoreReport& b,
                                       double alpha) {
    if (a.plan.k != b.plan.k || a.plan.assignments != b.plan.assignments) {
        throw ConfigError("compare_models: reports built on different fold plans");
    }
    if (a.responses.size() != b.responses.size()) {
        throw ShapeError("compare_models: response count mismatch");
    }

    std::vector<Comparison> out;
    for (std::size_t c = 0; c < a.responses.size(); ++c) {
        out.push_back(compare_fold_rmse(a.responses[c].fold_rmse, b.responses[c].fold_rmse,
                                        alpha));
    }
    return out;
}

MvBoostParams tune_hyperparameters(const Matrix& X, const Matrix& Y, const TuningGrid& grid,
                                   const FoldPlan& plan) {
    if (grid.n_iterations.empty() || grid.learning_rates.empty() || grid.max_depths.empty()) {
        throw ConfigError("tune_hyperparameters: empty grid axis");
    }

    MvBoostParams best;
    double best_score = std::numeric_limits<double>::infinity();
    for (int n_iter : grid.n_iterations) {
        for (double lr : grid.learning_rates) {
            for (int depth : grid.max_depths) {
                MvBoostParams params;
                params.n_iterations = n_iter;
                params.learning_rate = lr;
                params.tree.max_depth = depth;
                params.tree.min_leaf = grid.min_leaf;
                params.response_count = static_cast<int>(Y.cols());

                ScoreReport report = cross_validate(
                    X, Y,
                    [&params](const Matrix& XT, const Matrix& YT) {
                        return mvboost_fit(XT, YT, params);
                    },
                    plan);
                double score = 0.0;
                for (const auto& r : report.responses) score += r.rmse;
                if (score < best_score) {
                    best_score = score;
                    best = params;
                }
            }
        }
    }
    return best;
}

std::string ScoreReport::to_json() const {
    nlohmann::json j;
    j["folds"] = plan.k;
    j["fold_seed"] = plan.seed;
    auto arr = nlohmann::json::array();
    for (const auto& r : responses) {
        nlohmann::json e;
        e["response"] = r.response;
        e["r2"] = r.r2;
        e["rmse"] = r.rmse;
        e["fold_rmse"] = r.fold_rmse;
        auto fold_r2 = nlohmann::json::array();
        for (double v : r.fold_r2) {
            if (std::isnan(v)) fold_r2.push_back(nullptr);
            else fold_r2.push_back(v);
        }
        e["fold_r2"] = fold_r2;
        arr.push_back(e);
    }
    j["responses"] = arr;
    return j.dump();
}

} // namespace nexus
