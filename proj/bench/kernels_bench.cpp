// Serial vs OpenMP kernels. Run with OMP_NUM_THREADS to vary the thread count.

#include <benchmark/benchmark.h>

#include "capmap/kernels.hpp"
#include "capmap/learning.hpp"
#include "generators.hpp"

using namespace capmap;

namespace {

struct CountFixture {
  CountLayout layout;
  std::vector<WeightedTransition> data;
};

const CountFixture& counts_input() {
  static const CountFixture f = [] {
    testgen::Rng rng(1);
    const auto model = testgen::random_model(rng, 12, 0.3, false);
    const auto traces = simulate_traces(model, 20000, 5, 0.8);
    return CountFixture{make_count_layout(model), prepare_training_set(model, traces).transitions};
  }();
  return f;
}

struct QueryFixture {
  PointEstimates model;
  std::vector<CapabilitySpec> specs;
};

const QueryFixture& query_input() {
  static const QueryFixture f = [] {
    testgen::Rng rng(2);
    const auto model = testgen::random_polytree(rng, 60);
    std::vector<CapabilitySpec> specs;
    for (int i = 0; i < 256; ++i) specs.push_back(testgen::random_spec(rng, model));
    return QueryFixture{PointEstimates(model), std::move(specs)};
  }();
  return f;
}

const SimulationPlan& simulation_input() {
  static const SimulationPlan plan = [] {
    testgen::Rng rng(3);
    return SimulationPlan(testgen::random_model(rng, 20, 0.2, false));
  }();
  return plan;
}

template <auto Kernel>
void BM_accumulate(benchmark::State& state) {
  const auto& in = counts_input();
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(in.layout, in.data));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * in.data.size()));
}

template <auto Kernel>
void BM_query_batch(benchmark::State& state) {
  const auto& in = query_input();
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(in.model, in.specs));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * in.specs.size()));
}

template <auto Kernel>
void BM_simulate(benchmark::State& state) {
  const auto& plan = simulation_input();
  const auto count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(plan, count, 42, 0.8));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * count));
}

}  // namespace

BENCHMARK(BM_accumulate<serial::accumulate_counts>)->Name("accumulate_counts/serial");
BENCHMARK(BM_accumulate<parallel::accumulate_counts>)->Name("accumulate_counts/parallel");
BENCHMARK(BM_query_batch<serial::query_batch>)->Name("query_batch/serial");
BENCHMARK(BM_query_batch<parallel::query_batch>)->Name("query_batch/parallel");
BENCHMARK(BM_simulate<serial::simulate>)->Name("simulate/serial")->Arg(10000);
BENCHMARK(BM_simulate<parallel::simulate>)->Name("simulate/parallel")->Arg(10000);

BENCHMARK_MAIN();
