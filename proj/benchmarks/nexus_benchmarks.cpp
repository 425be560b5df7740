#include <benchmark/benchmark.h>

#include "nexus/boosting.hpp"
#include "nexus/cart.hpp"
#include "nexus/mvtboost.hpp"
#include "nexus/rng.hpp"
#include "nexus/seasonal.hpp"
#include "nexus/synthetic.hpp"

namespace {

// City-scale problem: ten years of monthly rows, the full predictor set.
nexus::SyntheticCity bench_city() {
    nexus::SyntheticSpec spec;
    spec.seed = 1;
    spec.coupling = 0.6;
    spec.water.coefficients = {0.7, 0.0, 0.0, 0.8, 0.0, 0.0, 0.0, 0.5};
    spec.water.seasonal_amplitude = 2.0;
    spec.water.seasonal_period = 12;
    spec.electricity.coefficients = {0.9, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.4};
    spec.electricity.seasonal_amplitude = 1.5;
    spec.electricity.seasonal_period = 6;
    return nexus::generate(spec);
}

void BM_fit_tree(benchmark::State& state) {
    nexus::SyntheticCity city = bench_city();
    std::vector<double> y = city.dataset.Y.column(0);
    nexus::TreeParams params;
    params.max_depth = static_cast<int>(state.range(0));
    params.min_leaf = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(nexus::fit_tree(city.dataset.X, y, params));
    }
}
BENCHMARK(BM_fit_tree)->Arg(2)->Arg(3)->Arg(4);

void BM_boost_fit(benchmark::State& state) {
    nexus::SyntheticCity city = bench_city();
    std::vector<double> y = city.dataset.Y.column(0);
    nexus::BoostParams params;
    params.n_iterations = static_cast<int>(state.range(0));
    params.learning_rate = 0.05;
    params.tree.max_depth = 3;
    params.tree.min_leaf = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(nexus::boost_fit(city.dataset.X, y, params));
    }
}
BENCHMARK(BM_boost_fit)->Arg(100)->Arg(500);

void BM_mvboost_fit(benchmark::State& state) {
    nexus::SyntheticCity city = bench_city();
    nexus::MvBoostParams params;
    params.n_iterations = static_cast<int>(state.range(0));
    params.learning_rate = 0.05;
    params.tree.max_depth = 3;
    params.tree.min_leaf = 5;
    params.response_count = 2;
    for (auto _ : state) {
        benchmark::DoNotOptimize(nexus::mvboost_fit(city.dataset.X, city.dataset.Y, params));
    }
}
BENCHMARK(BM_mvboost_fit)->Arg(100)->Arg(500);

void BM_boost_predict(benchmark::State& state) {
    nexus::SyntheticCity city = bench_city();
    nexus::MvBoostParams params;
    params.n_iterations = 500;
    params.learning_rate = 0.05;
    params.tree.max_depth = 3;
    params.tree.min_leaf = 5;
    params.response_count = 2;
    nexus::BoostedEnsemble model = nexus::mvboost_fit(city.dataset.X, city.dataset.Y, params);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nexus::boost_predict(model, city.dataset.X));
    }
}
BENCHMARK(BM_boost_predict);

void BM_periodogram(benchmark::State& state) {
    nexus::SyntheticCity city = bench_city();
    std::vector<double> y = city.dataset.Y.column(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nexus::periodogram(y));
    }
}
BENCHMARK(BM_periodogram);

} // namespace

BENCHMARK_MAIN();
