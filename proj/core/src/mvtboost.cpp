#include "nexus/mvtboost.hpp"

#include <cmath>

#include <json.hpp>

#include "nexus/errors.hpp"
#include "nexus/format.hpp"
#include "nexus/stats.hpp"

namespace nexus {

namespace {

std::vector<std::string> default_labels(const std::string& prefix, std::size_t n,
                                        std::vector<std::string> given) {
    if (!given.empty()) {
        if (given.size() != n) throw ShapeError(prefix + " labels: wrong count");
        return given;
    }
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

std::vector<std::string> make_pair_labels(const std::vector<std::string>& responses) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < responses.size(); ++k) {
        for (std::size_t l = k; l < responses.size(); ++l) {
            out.push_back(responses[k] + ":" + responses[l]);
        }
    }
    return out;
}

// Squared sample covariance summed over all unordered pairs, variance terms
// included.
double discrepancy(const std::vector<std::vector<double>>& residuals) {
    const std::size_t q = residuals.size();
    double d = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        for (std::size_t l = k; l < q; ++l) {
            double c = sample_covariance(residuals[k], residuals[l]);
            d += c * c;
        }
    }
    return d;
}

// Contribution to D of the entries involving response k only.
double discrepancy_slice(const std::vector<std::vector<double>>& residuals,
                         const std::vector<double>& rk, std::size_t k) {
    double d = 0.0;
    for (std::size_t l = 0; l < residuals.size(); ++l) {
        double c = l == k ? sample_covariance(rk, rk)
                          : sample_covariance(rk, residuals[l]);
        d += c * c;
    }
    return d;
}

void validate_fit_inputs(const Matrix& X, const Matrix& Y, const MvBoostParams& params) {
    if (Y.cols() == 0) throw ConfigError("mvboost_fit: no responses");
    if (Y.rows() < 2) throw InsufficientDataError("mvboost_fit: need at least 2 rows");
    if (X.rows() != Y.rows()) throw ShapeError("mvboost_fit: X and Y row counts differ");
    if (!X.all_finite() || !Y.all_finite()) {
        throw ValidationError("mvboost_fit: non-finite value");
    }
    if (params.n_iterations < 0) throw ConfigError("mvboost_fit: n_iterations must be >= 0");
    if (!(params.learning_rate > 0.0) || params.learning_rate > 1.0) {
        throw ConfigError("mvboost_fit: learning_rate must be in (0, 1]");
    }
    if (static_cast<std::size_t>(params.response_count) != Y.cols()) {
        throw ShapeError("mvboost_fit: response_count does not match Y");
    }
}

} // namespace

int response_pair_index(int k, int l, int q) {
    if (k > l || l >= q || k < 0) throw ShapeError("response_pair_index: bad pair");
    // Row k starts after the q + (q-1) + ... + (q-k+1) pairs of earlier rows.
    return k * q - k * (k - 1) / 2 + (l - k);
}

BoostedEnsemble mvboost_fit(const Matrix& X, const Matrix& Y, const MvBoostParams& params) {
    validate_fit_inputs(X, Y, params);
    const std::size_t n = Y.rows();
    const std::size_t q = Y.cols();

    BoostedEnsemble model;
    model.feature_count = static_cast<int>(X.cols());
    model.n_iterations = params.n_iterations;
    model.learning_rate = params.learning_rate;
    model.tree_params = params.tree;

    std::vector<std::vector<double>> residuals(q);
    for (std::size_t k = 0; k < q; ++k) {
        std::vector<double> col = Y.column(k);
        model.intercepts.push_back(mean(col));
        residuals[k].resize(n);
        for (std::size_t i = 0; i < n; ++i) residuals[k][i] = col[i] - model.intercepts[k];
    }

    for (int it = 0; it < params.n_iterations; ++it) {
        int best_k = -1;
        double best_decrease = 0.0;
        RegressionTree best_tree;
        std::vector<double> best_residual;

        for (std::size_t k = 0; k < q; ++k) {
            RegressionTree tree = fit_tree(X, residuals[k], params.tree);
            std::vector<double> pred = tree.predict_rows(X);
            std::vector<double> updated(n);
            for (std::size_t i = 0; i < n; ++i) {
                updated[i] = residuals[k][i] - params.learning_rate * pred[i];
            }
            double before = discrepancy_slice(residuals, residuals[k], k);
            double after = discrepancy_slice(residuals, updated, k);
            double decrease = before - after;
            if (best_k < 0 || decrease > best_decrease) {
                best_k = static_cast<int>(k);
                best_decrease = decrease;
                best_tree = std::move(tree);
                best_residual = std::move(updated);
            }
        }

        // A strictly D-increasing commit is never made; the tolerance keeps
        // rounding-level negatives (e.g. a no-split tree) committable.
        double tol = 1e-12 * (1.0 + std::fabs(discrepancy_slice(residuals,
                                                                residuals[static_cast<std::size_t>(best_k)],
                                                                static_cast<std::size_t>(best_k))));
        if (best_decrease < -tol) break;

        residuals[static_cast<std::size_t>(best_k)] = std::move(best_residual);
        model.stages.push_back({best_k, std::move(best_tree), params.learning_rate});
    }
    return model;
}

CovarianceExplainedMatrix covariance_explained(const BoostedEnsemble& model, const Matrix& X,
                                               const Matrix& Y,
                                               std::vector<std::string> predictor_labels,
                                               std::vector<std::string> response_labels) {
    const std::size_t n = Y.rows();
    const std::size_t q = Y.cols();
    const std::size_t p = X.cols();
    if (X.rows() != n) throw ShapeError("covariance_explained: X and Y row counts differ");
    if (p != static_cast<std::size_t>(model.feature_count)) {
        throw ShapeError("covariance_explained: feature count mismatch");
    }
    if (q != static_cast<std::size_t>(model.response_count())) {
        throw ShapeError("covariance_explained: response count mismatch");
    }

    CovarianceExplainedMatrix out;
    out.predictor_labels = default_labels("x", p, std::move(predictor_labels));
    std::vector<std::string> resp = default_labels("y", q, std::move(response_labels));
    out.pair_labels = make_pair_labels(resp);
    out.entries = Matrix(p, static_cast<std::size_t>(response_pair_count(static_cast<int>(q))));

    std::vector<std::vector<double>> residuals(q);
    for (std::size_t k = 0; k < q; ++k) {
        std::vector<double> col = Y.column(k);
        double intercept = model.intercepts[k];
        residuals[k].resize(n);
        for (std::size_t i = 0; i < n; ++i) residuals[k][i] = col[i] - intercept;
    }

    for (const Stage& stage : model.stages) {
        const std::size_t k = static_cast<std::size_t>(stage.response_index);
        std::vector<double> pred = stage.tree.predict_rows(X);
        std::vector<double> updated(n);
        for (std::size_t i = 0; i < n; ++i) {
            updated[i] = residuals[k][i] - stage.weight * pred[i];
        }

        double total_reduction = 0.0;
        for (double r : stage.tree.sse_reduction_by_feature) total_reduction += r;

        if (total_reduction > 0.0) {
            for (std::size_t l = 0; l < q; ++l) {
                double before = l == k ? sample_covariance(residuals[k], residuals[k])
                                       : sample_covariance(residuals[k], residuals[l]);
                double after = l == k ? sample_covariance(updated, updated)
                                      : sample_covariance(updated, residuals[l]);
                double delta = before * before - after * after;
                int pair = response_pair_index(static_cast<int>(std::min(k, l)),
                                               static_cast<int>(std::max(k, l)),
                                               static_cast<int>(q));
                for (std::size_t j = 0; j < p; ++j) {
                    double share = stage.tree.sse_reduction_by_feature[j] / total_reduction;
                    if (share != 0.0) {
                        out.entries(j, static_cast<std::size_t>(pair)) += share * delta;
                    }
                }
            }
        }
        residuals[k] = std::move(updated);
    }
    return out;
}

RelativeInfluence relative_influence(const BoostedEnsemble& model,
                                     std::vector<std::string> predictor_labels,
                                     std::vector<std::string> response_labels) {
    const std::size_t q = static_cast<std::size_t>(model.response_count());
    const std::size_t p = static_cast<std::size_t>(model.feature_count);

    RelativeInfluence out;
    out.predictor_labels = default_labels("x", p, std::move(predictor_labels));
    out.response_labels = default_labels("y", q, std::move(response_labels));
    out.per_response.assign(q, std::vector<double>(p, 0.0));

    for (const Stage& stage : model.stages) {
        auto& acc = out.per_response[static_cast<std::size_t>(stage.response_index)];
        for (std::size_t j = 0; j < p; ++j) {
            acc[j] += stage.tree.sse_reduction_by_feature[j];
        }
    }
    for (auto& v : out.per_response) {
        double total = 0.0;
        for (double x : v) total += x;
        if (total > 0.0) {
            for (double& x : v) x = 100.0 * x / total;
        }
    }
    return out;
}

std::vector<double> RelativeInfluence::averaged() const {
    if (per_response.empty()) return {};
    std::vector<double> out(per_response[0].size(), 0.0);
    for (const auto& v : per_response) {
        for (std::size_t j = 0; j < v.size(); ++j) out[j] += v[j];
    }
    for (double& x : out) x /= static_cast<double>(per_response.size());
    return out;
}

std::vector<double> staged_discrepancy(const BoostedEnsemble& model, const Matrix& X,
                                       const Matrix& Y) {
    const std::size_t n = Y.rows();
    const std::size_t q = Y.cols();
    if (X.rows() != n) throw ShapeError("staged_discrepancy: X and Y row counts differ");

    std::vector<std::vector<double>> residuals(q);
    for (std::size_t k = 0; k < q; ++k) {
        std::vector<double> col = Y.column(k);
        residuals[k].resize(n);
        for (std::size_t i = 0; i < n; ++i) residuals[k][i] = col[i] - model.intercepts[k];
    }

    std::vector<double> out;
    out.push_back(discrepancy(residuals));
    for (const Stage& stage : model.stages) {
        const std::size_t k = static_cast<std::size_t>(stage.response_index);
        std::vector<double> pred = stage.tree.predict_rows(X);
        for (std::size_t i = 0; i < n; ++i) residuals[k][i] -= stage.weight * pred[i];
        out.push_back(discrepancy(residuals));
    }
    return out;
}

std::string CovarianceExplainedMatrix::to_csv() const {
    std::string out = "predictor";
    for (const auto& l : pair_labels) out += "," + csv_field(l);
    out += "\n";
    for (std::size_t j = 0; j < entries.rows(); ++j) {
        out += csv_field(predictor_labels[j]);
        for (std::size_t c = 0; c < entries.cols(); ++c) {
            out += "," + format_double(entries(j, c));
        }
        out += "\n";
    }
    return out;
}

std::string CovarianceExplainedMatrix::to_json() const {
    nlohmann::json j;
    j["predictors"] = predictor_labels;
    j["pairs"] = pair_labels;
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < entries.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (std::size_t c = 0; c < entries.cols(); ++c) row.push_back(entries(r, c));
        rows.push_back(row);
    }
    j["entries"] = rows;
    return j.dump();
}

std::string RelativeInfluence::to_csv() const {
    std::string out = "predictor";
    for (const auto& l : response_labels) out += "," + csv_field(l);
    out += ",mean\n";
    std::vector<double> avg = averaged();
    for (std::size_t j = 0; j < predictor_labels.size(); ++j) {
        out += csv_field(predictor_labels[j]);
        for (const auto& v : per_response) out += "," + format_double(v[j]);
        out += "," + format_double(avg[j]) + "\n";
    }
    return out;
}

std::string RelativeInfluence::to_json() const {
    nlohmann::json j;
    j["predictors"] = predictor_labels;
    j["responses"] = response_labels;
    j["influence"] = per_response;
    j["mean"] = averaged();
    return j.dump();
}

} // namespace nexus
