#pragma once

#include <string>
#include <vector>

#include "nexus/cart.hpp"
#include "nexus/matrix.hpp"

namespace nexus {

struct BoostParams {
    int n_iterations = 1000;
    double learning_rate = 0.05;
    TreeParams tree;
};

// One committed boosting stage: a tree fitted to the residuals of the given
// response, applied with a fixed weight.
struct Stage {
    int response_index = 0;
    RegressionTree tree;
    double weight = 0.0;

    bool operator==(const Stage& other) const = default;
};

// Additive ensemble shared by the univariate and multivariate fits. The
// prediction for response k is intercepts[k] plus the weighted sum of the
// trees committed to k.
struct BoostedEnsemble {
    std::vector<double> intercepts;
    std::vector<Stage> stages;
    int feature_count = 0;
    int n_iterations = 0;
    double learning_rate = 0.0;
    TreeParams tree_params;

    int response_count() const { return static_cast<int>(intercepts.size()); }

    bool operator==(const BoostedEnsemble& other) const = default;
};

// Squared-error gradient boosting: intercept = mean(y), then each iteration
// fits a tree to the current residuals and commits it with weight
// learning_rate.
BoostedEnsemble boost_fit(const Matrix& X, const std::vector<double>& y,
                          const BoostParams& params);

// Returns an m x q matrix of predictions.
Matrix boost_predict(const BoostedEnsemble& model, const Matrix& X);

// Training SSE after the intercept and after each committed stage
// (length stages + 1). For multi-response models y is the single response
// named by response_index.
std::vector<double> staged_training_error(const BoostedEnsemble& model, const Matrix& X,
                                          const std::vector<double>& y,
                                          int response_index = 0);

std::string ensemble_to_json(const BoostedEnsemble& model);
BoostedEnsemble ensemble_from_json(const std::string& text);

} // namespace nexus
