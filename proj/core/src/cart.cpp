#include "nexus/cart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "nexus/errors.hpp"

namespace nexus {

namespace {

// Mean over the given sample indices, summed in index order so that equal
// partitions always produce bit-identical leaf values.
double subset_mean(const std::vector<double>& y, const std::vector<int>& idx) {
    double s = 0.0;
    for (int i : idx) s += y[static_cast<std::size_t>(i)];
    return s / static_cast<double>(idx.size());
}

double subset_sse(const std::vector<double>& y, const std::vector<int>& idx, double m) {
    double s = 0.0;
    for (int i : idx) {
        double d = y[static_cast<std::size_t>(i)] - m;
        s += d * d;
    }
    return s;
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
};

// One sorted pass per feature with running sums. The running SSE formula is
// used only to rank candidates; the chosen split is re-evaluated with the
// two-pass formula before committing.
SplitChoice best_split(const Matrix& X, const std::vector<double>& y,
                       const std::vector<int>& idx, int min_leaf) {
    const std::size_t n = idx.size();
    const std::size_t p = X.cols();
    SplitChoice best;
    double best_sse = std::numeric_limits<double>::infinity();

    std::vector<int> order;
    for (std::size_t j = 0; j < p; ++j) {
        order = idx;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            double xa = X(static_cast<std::size_t>(a), j);
            double xb = X(static_cast<std::size_t>(b), j);
            if (xa != xb) return xa < xb;
            return a < b;
        });

        double total_sum = 0.0;
        double total_sumsq = 0.0;
        for (int i : order) {
            double v = y[static_cast<std::size_t>(i)];
            total_sum += v;
            total_sumsq += v * v;
        }

        double left_sum = 0.0;
        double left_sumsq = 0.0;
        for (std::size_t t = 0; t + 1 < n; ++t) {
            double v = y[static_cast<std::size_t>(order[t])];
            left_sum += v;
            left_sumsq += v * v;

            double xt = X(static_cast<std::size_t>(order[t]), j);
            double xn = X(static_cast<std::size_t>(order[t + 1]), j);
            if (xt == xn) continue;

            std::size_t n_left = t + 1;
            std::size_t n_right = n - n_left;
            if (n_left < static_cast<std::size_t>(min_leaf) ||
                n_right < static_cast<std::size_t>(min_leaf)) {
                continue;
            }

            double right_sum = total_sum - left_sum;
            double right_sumsq = total_sumsq - left_sumsq;
            double sse_left = left_sumsq - left_sum * left_sum / static_cast<double>(n_left);
            double sse_right = right_sumsq - right_sum * right_sum / static_cast<double>(n_right);
            double sse = std::max(sse_left, 0.0) + std::max(sse_right, 0.0);

            // Strict < keeps the first candidate on ties: lowest feature
            // index, then lowest threshold (thresholds ascend within j).
            if (sse < best_sse) {
                best_sse = sse;
                best.found = true;
                best.feature = static_cast<int>(j);
                best.threshold = xt + (xn - xt) / 2.0;
            }
        }
    }
    return best;
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, const std::vector<double>& y, const TreeParams& params)
        : X_(X), y_(y), params_(params) {
        tree_.params = params;
        tree_.feature_count = static_cast<int>(X.cols());
        tree_.sse_reduction_by_feature.assign(X.cols(), 0.0);
    }

    RegressionTree build() {
        std::vector<int> all(y_.size());
        for (std::size_t i = 0; i < y_.size(); ++i) all[i] = static_cast<int>(i);
        grow(all, 0);
        return std::move(tree_);
    }

private:
    int make_leaf(const std::vector<int>& idx) {
        TreeNode node;
        node.is_leaf = true;
        node.value = subset_mean(y_, idx);
        node.n_samples = static_cast<int>(idx.size());
        tree_.nodes.push_back(node);
        return static_cast<int>(tree_.nodes.size()) - 1;
    }

    bool targets_constant(const std::vector<int>& idx) const {
        double first = y_[static_cast<std::size_t>(idx[0])];
        for (int i : idx) {
            if (y_[static_cast<std::size_t>(i)] != first) return false;
        }
        return true;
    }

    int grow(const std::vector<int>& idx, int depth) {
        if (depth >= params_.max_depth || idx.size() < 2 ||
            idx.size() < 2 * static_cast<std::size_t>(params_.min_leaf) ||
            X_.cols() == 0 || targets_constant(idx)) {
            return make_leaf(idx);
        }

        SplitChoice split = best_split(X_, y_, idx, params_.min_leaf);
        if (!split.found) return make_leaf(idx);

        std::vector<int> left_idx;
        std::vector<int> right_idx;
        for (int i : idx) {
            if (X_(static_cast<std::size_t>(i), static_cast<std::size_t>(split.feature)) <=
                split.threshold) {
                left_idx.push_back(i);
            } else {
                right_idx.push_back(i);
            }
        }

        // Commit based on the exact two-pass SSE so the recorded reduction is
        // consistent with leaf values.
        double node_mean = subset_mean(y_, idx);
        double node_sse = subset_sse(y_, idx, node_mean);
        double left_sse = subset_sse(y_, left_idx, subset_mean(y_, left_idx));
        double right_sse = subset_sse(y_, right_idx, subset_mean(y_, right_idx));
        double improvement = node_sse - (left_sse + right_sse);
        if (improvement < params_.min_split_improvement || improvement <= 0.0) {
            return make_leaf(idx);
        }

        int self = static_cast<int>(tree_.nodes.size());
        TreeNode node;
        node.is_leaf = false;
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.n_samples = static_cast<int>(idx.size());
        tree_.nodes.push_back(node);

        tree_.sse_reduction_by_feature[static_cast<std::size_t>(split.feature)] += improvement;

        int left = grow(left_idx, depth + 1);
        int right = grow(right_idx, depth + 1);
        tree_.nodes[static_cast<std::size_t>(self)].left = left;
        tree_.nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    const Matrix& X_;
    const std::vector<double>& y_;
    TreeParams params_;
    RegressionTree tree_;
};

nlohmann::json node_to_json(const RegressionTree& tree, int index) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
    nlohmann::json j;
    if (node.is_leaf) {
        j["kind"] = "leaf";
        j["value"] = node.value;
        j["n_samples"] = node.n_samples;
    } else {
        j["kind"] = "internal";
        j["feature"] = node.feature;
        j["threshold"] = node.threshold;
        j["n_samples"] = node.n_samples;
        j["left"] = node_to_json(tree, node.left);
        j["right"] = node_to_json(tree, node.right);
    }
    return j;
}

int node_from_json(const nlohmann::json& j, RegressionTree& tree) {
    int self = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.at("kind") == "leaf") {
        tree.nodes[self].is_leaf = true;
        tree.nodes[self].value = j.at("value").get<double>();
        tree.nodes[self].n_samples = j.at("n_samples").get<int>();
    } else {
        tree.nodes[self].is_leaf = false;
        tree.nodes[self].feature = j.at("feature").get<int>();
        tree.nodes[self].threshold = j.at("threshold").get<double>();
        tree.nodes[self].n_samples = j.at("n_samples").get<int>();
        int left = node_from_json(j.at("left"), tree);
        int right = node_from_json(j.at("right"), tree);
        tree.nodes[self].left = left;
        tree.nodes[self].right = right;
    }
    return self;
}

} // namespace

RegressionTree fit_tree(const Matrix& X, const std::vector<double>& targets,
                        const TreeParams& params) {
    if (targets.empty()) throw InsufficientDataError("fit_tree: empty data");
    if (X.rows() != targets.size()) {
        throw ShapeError("fit_tree: X has " + std::to_string(X.rows()) +
                         " rows but targets has " + std::to_string(targets.size()));
    }
    if (!X.all_finite()) throw ValidationError("fit_tree: non-finite value in X");
    for (double v : targets) {
        if (!std::isfinite(v)) throw ValidationError("fit_tree: non-finite target");
    }
    if (params.max_depth < 0) throw ConfigError("fit_tree: max_depth must be >= 0");
    if (params.min_leaf < 1) throw ConfigError("fit_tree: min_leaf must be >= 1");
    if (params.min_split_improvement < 0.0) {
        throw ConfigError("fit_tree: min_split_improvement must be >= 0");
    }

    return TreeBuilder(X, targets, params).build();
}

double RegressionTree::predict(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(feature_count)) {
        throw ShapeError("predict: expected " + std::to_string(feature_count) +
                         " features, got " + std::to_string(x.size()));
    }
    int at = 0;
    while (!nodes[static_cast<std::size_t>(at)].is_leaf) {
        const TreeNode& node = nodes[static_cast<std::size_t>(at)];
        at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                         : node.right;
    }
    return nodes[static_cast<std::size_t>(at)].value;
}

std::vector<double> RegressionTree::predict_rows(const Matrix& X) const {
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict(X.row(i));
    return out;
}

int RegressionTree::leaf_count() const {
    int c = 0;
    for (const TreeNode& n : nodes) c += n.is_leaf ? 1 : 0;
    return c;
}

int RegressionTree::depth() const {
    // Iterative depth over the flat layout.
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int deepest = 0;
    while (!stack.empty()) {
        auto [at, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        const TreeNode& node = nodes[static_cast<std::size_t>(at)];
        if (!node.is_leaf) {
            stack.push_back({node.left, d + 1});
            stack.push_back({node.right, d + 1});
        }
    }
    return deepest;
}

double predict_tree(const RegressionTree& tree, std::span<const double> x) {
    return tree.predict(x);
}

std::string tree_to_json(const RegressionTree& tree) {
    nlohmann::json j;
    j["params"] = {{"max_depth", tree.params.max_depth},
                   {"min_leaf", tree.params.min_leaf},
                   {"min_split_improvement", tree.params.min_split_improvement}};
    j["feature_count"] = tree.feature_count;
    j["sse_reduction_by_feature"] = tree.sse_reduction_by_feature;
    j["root"] = node_to_json(tree, 0);
    return j.dump();
}

RegressionTree tree_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    RegressionTree tree;
    tree.params.max_depth = j.at("params").at("max_depth").get<int>();
    tree.params.min_leaf = j.at("params").at("min_leaf").get<int>();
    tree.params.min_split_improvement =
        j.at("params").at("min_split_improvement").get<double>();
    tree.feature_count = j.at("feature_count").get<int>();
    tree.sse_reduction_by_feature =
        j.at("sse_reduction_by_feature").get<std::vector<double>>();
    node_from_json(j.at("root"), tree);
    return tree;
}

} // namespace nexus
