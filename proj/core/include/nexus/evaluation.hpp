#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nexus/boosting.hpp"
#include "nexus/matrix.hpp"
#include "nexus/mvtboost.hpp"

namespace nexus {

struct FoldPlan {
    int k = 5;
    std::vector<int> assignments; // fold id per row
    std::uint64_t seed = 0;

    bool operator==(const FoldPlan& other) const = default;
};

// Seeded uniform shuffle, then contiguous blocks; fold sizes differ by at
// most one (earlier folds take the remainder).
FoldPlan make_folds(std::size_t n, int k, std::uint64_t seed);

// Contiguous time blocks, no shuffle.
FoldPlan make_time_blocked_folds(std::size_t n, int k);

double rmse(const std::vector<double>& pred, const std::vector<double>& obs);

// 1 - SSE/SST; may be negative. Throws on zero-variance observations.
double r_squared(const std::vector<double>& pred, const std::vector<double>& obs);

// Headline r2/rmse are pooled over out-of-fold predictions; per-fold values
// are retained for paired comparisons.
struct ResponseScore {
    std::string response;
    double r2 = 0.0;
    double rmse = 0.0;
    std::vector<double> fold_rmse;
    std::vector<double> fold_r2;
};

struct ScoreReport {
    std::vector<ResponseScore> responses;
    FoldPlan plan;

    std::string to_json() const;
};

using ModelFitter = std::function<BoostedEnsemble(const Matrix& X, const Matrix& Y)>;

// For each fold: fit on the remaining rows, predict the held-out rows, pool.
ScoreReport cross_validate(const Matrix& X, const Matrix& Y, const ModelFitter& fitter,
                           const FoldPlan& plan,
                           std::vector<std::string> response_labels = {});

struct SelectionRule {
    int top_m = 5;              // used when influence_threshold < 0
    double influence_threshold = -1.0; // mean-influence percentage cutoff
};

// Fits the full model, averages relative influence across responses, ranks.
// Returns selected predictor indices in rank order.
std::vector<int> select_variables(const Matrix& X, const Matrix& Y,
                                  const MvBoostParams& params, const SelectionRule& rule);

enum class Comparison { similar, a_better, b_better };

std::string to_string(Comparison c);

// Paired two-sided t-test on fold RMSE differences. Zero-variance differences
// degenerate to deterministic dominance.
Comparison compare_fold_rmse(const std::vector<double>& a, const std::vector<double>& b,
                             double alpha = 0.05);

// Per-response comparison; both reports must be built on the identical fold
// plan.
std::vector<Comparison> compare_models(const ScoreReport& a, const ScoreReport& b,
                                       double alpha = 0.05);

struct TuningGrid {
    std::vector<int> n_iterations = {200, 500, 1000};
    std::vector<double> learning_rates = {0.01, 0.05, 0.1};
    std::vector<int> max_depths = {2, 3, 4};
    int min_leaf = 5;
};

// Grid search minimizing pooled CV RMSE summed across responses; grid order
// is fixed so ties resolve deterministically.
MvBoostParams tune_hyperparameters(const Matrix& X, const Matrix& Y, const TuningGrid& grid,
                                   const FoldPlan& plan);

} // namespace nexus
