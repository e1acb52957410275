#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "flowscope/analysis.hpp"
#include "flowscope/flow_view.hpp"
#include "flowscope/ingest.hpp"
#include "flowscope/synth.hpp"
#include "flowscope/task_view.hpp"

using namespace flowscope;

namespace {

TaskDefinition navigation() {
  TaskDefinition t;
  t.name = "navigation";
  t.start_events = {{"NavigateToButton", Gesture::tap}};
  t.end_events = {{"StartNavigationButton", Gesture::tap}};
  t.termination_elements = {{"CancelButton", std::nullopt}, {"HomeButton", std::nullopt}};
  t.t_max = 60'000;
  t.aggregate_elements = {"OnScreenKeyboard"};
  t.p_min = 0.005;
  return t;
}

SessionStore fleet(std::size_t n) {
  auto config = synth::default_fleet_config();
  config.n_sessions = n;
  const auto data = synth::generate_fleet_data(config);
  return ingest::assemble_store(data.events, data.glances, data.driving);
}

std::vector<double> samples(std::size_t n) {
  std::mt19937_64 rng(1);
  std::lognormal_distribution<double> d(8.5, 0.7);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

void BM_Extraction(benchmark::State& state) {
  const auto store = fleet(static_cast<std::size_t>(state.range(0)));
  const auto task = navigation();
  for (auto _ : state) benchmark::DoNotOptimize(extraction::extract_sequences(store, task));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Extraction)->Arg(1'000)->Arg(10'000)->Unit(benchmark::kMillisecond);

void BM_BuildSankey(benchmark::State& state) {
  const auto analysis = analyze_task(fleet(static_cast<std::size_t>(state.range(0))), navigation());
  for (auto _ : state) benchmark::DoNotOptimize(task_view::build_sankey(analysis.flows, analysis.collapsed, 0.005));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildSankey)->Arg(1'000)->Arg(10'000)->Unit(benchmark::kMillisecond);

void BM_SummaryStats(benchmark::State& state) {
  const auto x = samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(flow_view::summary_stats(x));
}
BENCHMARK(BM_SummaryStats)->Arg(100)->Arg(10'000);

void BM_DensityCurve(benchmark::State& state) {
  const auto x = samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(flow_view::density_curve(x));
}
BENCHMARK(BM_DensityCurve)->Arg(100)->Arg(10'000);

}  // namespace

BENCHMARK_MAIN();
