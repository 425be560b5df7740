#include <doctest.h>

#include <cmath>

#include "nexus/boosting.hpp"
#include "nexus/errors.hpp"
#include "test_support.hpp"

using nexus::BoostedEnsemble;
using nexus::BoostParams;
using nexus::Matrix;

namespace {

BoostParams params(int iters, double lr, int depth = 1, int min_leaf = 1) {
    BoostParams p;
    p.n_iterations = iters;
    p.learning_rate = lr;
    p.tree.max_depth = depth;
    p.tree.min_leaf = min_leaf;
    return p;
}

} // namespace

TEST_CASE("zero iterations predicts the mean everywhere") {
    Matrix X = Matrix::from_rows({{1.0}, {2.0}, {3.0}});
    std::vector<double> y = {1.0, 2.0, 6.0};
    BoostedEnsemble model = nexus::boost_fit(X, y, params(0, 0.5));
    CHECK(model.intercepts[0] == 3.0);
    CHECK(model.stages.empty());

    Matrix pred = nexus::boost_predict(model, X);
    for (std::size_t i = 0; i < 3; ++i) CHECK(pred(i, 0) == 3.0);
}

TEST_CASE("hand-worked single step: intercept plus half the residual stump") {
    Matrix X = Matrix::from_rows({{1.0}, {2.0}});
    std::vector<double> y = {0.0, 2.0};
    BoostedEnsemble model = nexus::boost_fit(X, y, params(1, 0.5));

    CHECK(model.intercepts[0] == 1.0);
    REQUIRE(model.stages.size() == 1);
    CHECK(model.stages[0].weight == 0.5);

    Matrix pred = nexus::boost_predict(model, X);
    CHECK(pred(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pred(1, 0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("full-weight stump corrects separable data exactly") {
    Matrix X = Matrix::from_rows({{1.0}, {2.0}, {3.0}, {4.0}});
    std::vector<double> y = {0.0, 0.0, 1.0, 1.0};
    BoostedEnsemble model = nexus::boost_fit(X, y, params(1, 1.0));

    Matrix pred = nexus::boost_predict(model, X);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(pred(i, 0) == doctest::Approx(y[i]).epsilon(1e-12));
    }

    std::vector<double> staged = nexus::staged_training_error(model, X, y);
    REQUIRE(staged.size() == 2);
    CHECK(staged[0] == doctest::Approx(1.0)); // SSE of the mean predictor
    CHECK(staged[1] <= 1e-24);
}

TEST_CASE("one-iteration fit matches an independent single-step oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        nexus::Rng rng(seed + 500);
        std::size_t n = 4 + rng.next_below(40);
        Matrix X = testsup::random_matrix(n, 2, rng);
        std::vector<double> y = testsup::random_vector(n, rng);
        const double lr = 0.3;

        BoostedEnsemble model = nexus::boost_fit(X, y, params(1, lr));

        double intercept = 0.0;
        for (double v : y) intercept += v;
        intercept /= static_cast<double>(n);
        std::vector<double> residuals(n);
        for (std::size_t i = 0; i < n; ++i) residuals[i] = y[i] - intercept;
        auto oracle = testsup::brute_force_stump(X, residuals);

        Matrix pred = nexus::boost_predict(model, X);
        for (std::size_t i = 0; i < n; ++i) {
            double stump = oracle.found
                               ? (X(i, static_cast<std::size_t>(oracle.feature)) <= oracle.threshold
                                      ? oracle.left_value
                                      : oracle.right_value)
                               : 0.0;
            CHECK(pred(i, 0) == doctest::Approx(intercept + lr * stump).epsilon(1e-12));
        }
    }
}

TEST_CASE("staged training error never increases") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        nexus::Rng rng(seed + 900);
        std::size_t n = 10 + rng.next_below(60);
        std::size_t p = 1 + rng.next_below(4);
        Matrix X = testsup::random_matrix(n, p, rng);
        std::vector<double> y = testsup::random_vector(n, rng);
        double lr = 0.05 + 0.9 * rng.next_double();

        BoostedEnsemble model = nexus::boost_fit(X, y, params(25, lr, 2, 2));
        std::vector<double> staged = nexus::staged_training_error(model, X, y);
        REQUIRE(staged.size() == 26);
        for (std::size_t i = 1; i < staged.size(); ++i) {
            CHECK(staged[i] <= staged[i - 1] * (1.0 + 1e-12) + 1e-12);
        }
    }
}

TEST_CASE("shifting targets shifts predictions") {
    nexus::Rng rng(321);
    Matrix X = testsup::random_matrix(30, 3, rng);
    std::vector<double> y = testsup::random_vector(30, rng);
    std::vector<double> shifted = y;
    for (double& v : shifted) v += 11.5;

    BoostedEnsemble a = nexus::boost_fit(X, y, params(20, 0.1, 2, 2));
    BoostedEnsemble b = nexus::boost_fit(X, shifted, params(20, 0.1, 2, 2));
    Matrix pa = nexus::boost_predict(a, X);
    Matrix pb = nexus::boost_predict(b, X);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        CHECK(pb(i, 0) == doctest::Approx(pa(i, 0) + 11.5).epsilon(1e-9));
    }
}

TEST_CASE("identical inputs give bit-identical models") {
    nexus::Rng rng(9);
    Matrix X = testsup::random_matrix(40, 3, rng);
    std::vector<double> y = testsup::random_vector(40, rng);
    BoostParams p = params(30, 0.07, 3, 2);
    CHECK(nexus::boost_fit(X, y, p) == nexus::boost_fit(X, y, p));
}

TEST_CASE("prediction accumulates stage by stage") {
    nexus::Rng rng(42);
    Matrix X = testsup::random_matrix(20, 2, rng);
    std::vector<double> y = testsup::random_vector(20, rng);
    BoostedEnsemble model = nexus::boost_fit(X, y, params(12, 0.2, 2, 2));

    Matrix full = nexus::boost_predict(model, X);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double acc = model.intercepts[0];
        for (const nexus::Stage& stage : model.stages) {
            acc += stage.weight * stage.tree.predict(X.row(i));
        }
        CHECK(acc == doctest::Approx(full(i, 0)).epsilon(1e-12));
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(nexus::boost_fit(Matrix(0, 1), {}, params(1, 0.5)),
                    nexus::InsufficientDataError);

    Matrix X = Matrix::from_rows({{1.0}, {2.0}});
    std::vector<double> bad = {0.0, std::nan("")};
    CHECK_THROWS_AS(nexus::boost_fit(X, bad, params(1, 0.5)), nexus::ValidationError);

    std::vector<double> y = {0.0, 1.0};
    CHECK_THROWS_AS(nexus::boost_fit(X, y, params(1, 0.0)), nexus::ConfigError);
    CHECK_THROWS_AS(nexus::boost_fit(X, y, params(1, 1.5)), nexus::ConfigError);
    CHECK_THROWS_AS(nexus::boost_fit(X, y, params(-1, 0.5)), nexus::ConfigError);

    BoostedEnsemble model = nexus::boost_fit(X, y, params(1, 0.5));
    CHECK_THROWS_AS(nexus::boost_predict(model, Matrix(2, 3)), nexus::ShapeError);
    CHECK_THROWS_AS(nexus::staged_training_error(model, Matrix(3, 1), y), nexus::ShapeError);
}

TEST_CASE("ensemble json round trip") {
    nexus::Rng rng(7);
    Matrix X = testsup::random_matrix(25, 2, rng);
    std::vector<double> y = testsup::random_vector(25, rng);
    BoostedEnsemble model = nexus::boost_fit(X, y, params(8, 0.3, 2, 2));

    BoostedEnsemble back = nexus::ensemble_from_json(nexus::ensemble_to_json(model));
    CHECK(back == model);
}
