#include "nexus/boosting.hpp"

#include <cmath>

#include <json.hpp>

#include "nexus/errors.hpp"
#include "nexus/stats.hpp"

namespace nexus {

namespace {

void validate_inputs(const Matrix& X, std::size_t n_targets, const BoostParams& params) {
    if (n_targets == 0) throw InsufficientDataError("boost_fit: empty data");
    if (X.rows() != n_targets) {
        throw ShapeError("boost_fit: X rows and target length differ");
    }
    if (!X.all_finite()) throw ValidationError("boost_fit: non-finite value in X");
    if (params.n_iterations < 0) throw ConfigError("boost_fit: n_iterations must be >= 0");
    if (!(params.learning_rate > 0.0) || params.learning_rate > 1.0) {
        throw ConfigError("boost_fit: learning_rate must be in (0, 1]");
    }
}

nlohmann::json tree_json(const RegressionTree& tree);

} // namespace

BoostedEnsemble boost_fit(const Matrix& X, const std::vector<double>& y,
                          const BoostParams& params) {
    validate_inputs(X, y.size(), params);
    for (double v : y) {
        if (!std::isfinite(v)) throw ValidationError("boost_fit: non-finite target");
    }

    BoostedEnsemble model;
    model.feature_count = static_cast<int>(X.cols());
    model.n_iterations = params.n_iterations;
    model.learning_rate = params.learning_rate;
    model.tree_params = params.tree;
    model.intercepts = {mean(y)};

    std::vector<double> residuals(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) residuals[i] = y[i] - model.intercepts[0];

    for (int it = 0; it < params.n_iterations; ++it) {
        RegressionTree tree = fit_tree(X, residuals, params.tree);
        std::vector<double> pred = tree.predict_rows(X);
        for (std::size_t i = 0; i < residuals.size(); ++i) {
            residuals[i] -= params.learning_rate * pred[i];
        }
        model.stages.push_back({0, std::move(tree), params.learning_rate});
    }
    return model;
}

Matrix boost_predict(const BoostedEnsemble& model, const Matrix& X) {
    if (X.cols() != static_cast<std::size_t>(model.feature_count)) {
        throw ShapeError("boost_predict: expected " + std::to_string(model.feature_count) +
                         " features, got " + std::to_string(X.cols()));
    }
    const std::size_t q = model.intercepts.size();
    Matrix out(X.rows(), q);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t k = 0; k < q; ++k) out(i, k) = model.intercepts[k];
    }
    for (const Stage& stage : model.stages) {
        std::vector<double> pred = stage.tree.predict_rows(X);
        for (std::size_t i = 0; i < X.rows(); ++i) {
            out(i, static_cast<std::size_t>(stage.response_index)) += stage.weight * pred[i];
        }
    }
    return out;
}

std::vector<double> staged_training_error(const BoostedEnsemble& model, const Matrix& X,
                                          const std::vector<double>& y,
                                          int response_index) {
    if (X.rows() != y.size()) {
        throw ShapeError("staged_training_error: X rows and target length differ");
    }
    if (X.cols() != static_cast<std::size_t>(model.feature_count)) {
        throw ShapeError("staged_training_error: feature count mismatch");
    }

    std::vector<double> current(y.size(),
                                model.intercepts[static_cast<std::size_t>(response_index)]);
    auto sse = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            double d = y[i] - current[i];
            s += d * d;
        }
        return s;
    };

    std::vector<double> out;
    out.push_back(sse());
    for (const Stage& stage : model.stages) {
        if (stage.response_index != response_index) continue;
        std::vector<double> pred = stage.tree.predict_rows(X);
        for (std::size_t i = 0; i < y.size(); ++i) current[i] += stage.weight * pred[i];
        out.push_back(sse());
    }
    return out;
}

namespace {

nlohmann::json tree_json(const RegressionTree& tree) {
    return nlohmann::json::parse(tree_to_json(tree));
}

} // namespace

std::string ensemble_to_json(const BoostedEnsemble& model) {
    nlohmann::json j;
    j["intercepts"] = model.intercepts;
    j["feature_count"] = model.feature_count;
    j["n_iterations"] = model.n_iterations;
    j["learning_rate"] = model.learning_rate;
    j["tree_params"] = {{"max_depth", model.tree_params.max_depth},
                        {"min_leaf", model.tree_params.min_leaf},
                        {"min_split_improvement", model.tree_params.min_split_improvement}};
    j["stages"] = nlohmann::json::array();
    for (const Stage& stage : model.stages) {
        j["stages"].push_back({{"response", stage.response_index},
                               {"weight", stage.weight},
                               {"tree", tree_json(stage.tree)}});
    }
    return j.dump();
}

BoostedEnsemble ensemble_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    BoostedEnsemble model;
    model.intercepts = j.at("intercepts").get<std::vector<double>>();
    model.feature_count = j.at("feature_count").get<int>();
    model.n_iterations = j.at("n_iterations").get<int>();
    model.learning_rate = j.at("learning_rate").get<double>();
    model.tree_params.max_depth = j.at("tree_params").at("max_depth").get<int>();
    model.tree_params.min_leaf = j.at("tree_params").at("min_leaf").get<int>();
    model.tree_params.min_split_improvement =
        j.at("tree_params").at("min_split_improvement").get<double>();
    for (const auto& s : j.at("stages")) {
        Stage stage;
        stage.response_index = s.at("response").get<int>();
        stage.weight = s.at("weight").get<double>();
        stage.tree = tree_from_json(s.at("tree").dump());
        model.stages.push_back(std::move(stage));
    }
    return model;
}

} // namespace nexus
