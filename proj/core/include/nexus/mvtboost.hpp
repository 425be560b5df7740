#pragma once

#include <string>
#include <vector>

#include "nexus/boosting.hpp"
#include "nexus/matrix.hpp"

namespace nexus {

struct MvBoostParams {
    int n_iterations = 1000;
    double learning_rate = 0.05;
    TreeParams tree;
    int response_count = 2;
};

// Attribution of residual-covariance reduction: rows are predictors, columns
// are unordered response pairs (k, l) with k <= l in lexicographic order.
struct CovarianceExplainedMatrix {
    Matrix entries;
    std::vector<std::string> predictor_labels;
    std::vector<std::string> pair_labels;

    std::string to_csv() const;
    std::string to_json() const;
};

// Per-response percentage vectors; each fitted response sums to 100, a
// response with no committed stages yields the zero vector.
struct RelativeInfluence {
    std::vector<std::vector<double>> per_response;
    std::vector<std::string> predictor_labels;
    std::vector<std::string> response_labels;

    // Mean across responses, the ranking used for variable selection.
    std::vector<double> averaged() const;

    std::string to_csv() const;
    std::string to_json() const;
};

inline int response_pair_count(int q) { return q * (q + 1) / 2; }

// Flat index of the unordered pair (k, l), k <= l, in lexicographic order.
int response_pair_index(int k, int l, int q);

// Joint fit over q responses. Each iteration fits one candidate tree per
// response on that response's residuals, scores each candidate by the
// decrease in the covariance discrepancy
//   D = sum over pairs k <= l of cov(r_k, r_l)^2   (sample covariance, n-1)
// after a hypothetical commit at learning_rate, and commits exactly the best
// candidate (ties toward the lower response index). Stops early only if every
// candidate would increase D beyond rounding tolerance, so D is non-increasing
// across committed stages.
BoostedEnsemble mvboost_fit(const Matrix& X, const Matrix& Y, const MvBoostParams& params);

// Replays the stage sequence on the training data; each stage's change in
// every cov(r_k, r_l)^2 entry is attributed to predictors in proportion to the
// stage tree's SSE-reduction shares.
CovarianceExplainedMatrix covariance_explained(const BoostedEnsemble& model, const Matrix& X,
                                               const Matrix& Y,
                                               std::vector<std::string> predictor_labels = {},
                                               std::vector<std::string> response_labels = {});

RelativeInfluence relative_influence(const BoostedEnsemble& model,
                                     std::vector<std::string> predictor_labels = {},
                                     std::vector<std::string> response_labels = {});

// Discrepancy D after the intercept model and after each committed stage.
std::vector<double> staged_discrepancy(const BoostedEnsemble& model, const Matrix& X,
                                       const Matrix& Y);

} // namespace nexus
