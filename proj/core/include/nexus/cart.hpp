#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nexus/matrix.hpp"

namespace nexus {

struct TreeParams {
    int max_depth = 3;
    int min_leaf = 5;
    double min_split_improvement = 0.0;
};

// Flat node storage; index 0 is the root. Internal nodes route a sample left
// iff x[feature] <= threshold.
struct TreeNode {
    bool is_leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    int n_samples = 0;
};

// Least-squares binary regression tree. sse_reduction_by_feature[j] holds the
// total squared-error reduction of all internal nodes that split on feature j;
// it is the raw material for relative influence and covariance attribution.
struct RegressionTree {
    std::vector<TreeNode> nodes;
    TreeParams params;
    int feature_count = 0;
    std::vector<double> sse_reduction_by_feature;

    double predict(std::span<const double> x) const;
    std::vector<double> predict_rows(const Matrix& X) const;
    int leaf_count() const;
    int depth() const;

    bool operator==(const RegressionTree& other) const = default;
};

inline bool operator==(const TreeNode& a, const TreeNode& b) {
    return a.is_leaf == b.is_leaf && a.feature == b.feature &&
           a.threshold == b.threshold && a.left == b.left && a.right == b.right &&
           a.value == b.value && a.n_samples == b.n_samples;
}

inline bool operator==(const TreeParams& a, const TreeParams& b) {
    return a.max_depth == b.max_depth && a.min_leaf == b.min_leaf &&
           a.min_split_improvement == b.min_split_improvement;
}

// Greedy top-down induction. At each node every feature is scanned in one
// sorted pass; candidate thresholds are midpoints between consecutive distinct
// values; the split minimizing total child SSE wins, ties broken toward the
// lowest feature index and then the lowest threshold. Recursion stops at
// max_depth, min_leaf, fewer than two distinct targets, or an improvement
// below min_split_improvement.
RegressionTree fit_tree(const Matrix& X, const std::vector<double>& targets,
                        const TreeParams& params);

double predict_tree(const RegressionTree& tree, std::span<const double> x);

// Nested-document JSON (node kind, split feature, threshold, children / leaf
// value, n_samples) used for model persistence.
std::string tree_to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const std::string& text);

} // namespace nexus
