#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "spikelens/clusterer.hpp"
#include "spikelens/explainer.hpp"
#include "spikelens/forest.hpp"
#include "spikelens/rng.hpp"
#include "spikelens/spike_detector.hpp"

using namespace spikelens;

namespace {

Dataset make_data(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
  Dataset data(names);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(d);
    for (auto& v : row) v = rng.uniform();
    const double score = row[0] + row[1] - row[2] + 0.3 * rng.normal();
    data.add_row(row, score > 1.2 ? 1 : 0, static_cast<std::int64_t>(i));
  }
  return data;
}

void BM_TrainForest(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)), 40, 1);
  ForestParams p;
  p.n_trees = 50;
  for (auto _ : state) benchmark::DoNotOptimize(train(data, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainForest)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_TreeShap(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto data = make_data(400, d, 2);
  ForestParams p;
  p.n_trees = 10;
  p.max_depth = 6;
  const auto forest = train(data, p);
  const auto x = data.row(0);
  for (auto _ : state) benchmark::DoNotOptimize(explain_forest(forest, x));
}
BENCHMARK(BM_TreeShap)->Arg(8)->Arg(12)->Arg(16);

// Same forest and query as above, by subset enumeration.
void BM_BruteForceShapley(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto data = make_data(400, d, 2);
  ForestParams p;
  p.n_trees = 10;
  p.max_depth = 6;
  const auto forest = train(data, p);
  const auto x = data.row(0);
  const SubsetValue value = [&](std::uint64_t s) {
    double v = 0;
    for (const auto& t : forest.trees()) v += conditional_expectation(t, x, s);
    return v / static_cast<double>(forest.trees().size());
  };
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_shapley(value, d));
}
BENCHMARK(BM_BruteForceShapley)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  const auto data = make_data(2000, 40, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fit_best(data, static_cast<std::size_t>(state.range(0)), 1));
}
BENCHMARK(BM_KMeans)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Percentile(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> prices(static_cast<std::size_t>(state.range(0)));
  for (auto& v : prices) v = 40 + 10 * rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(resolve_thresholds(std::span<const double>(prices), ThresholdSpec{}));
}
BENCHMARK(BM_Percentile)->Arg(105120);  // one year of 5-minute prices

}  // namespace
BENCHMARK_MAIN();
