#include <benchmark/benchmark.h>

#include "amiroar/ndr/ndr.hpp"
#include "amiroar/sim/simulator.hpp"
#include "common.hpp"

using namespace amiroar;

// Messages per second through dissection and both detectors.
static void BM_DetectorThroughput(benchmark::State& state) {
  auto cfg = bench::scenario("fdi_meter");
  const auto model = ndr::train(cfg.sim, cfg.detector, std::chrono::hours{3});
  const auto run = sim::run_scenario(cfg.sim);
  for (auto _ : state) {
    ndr::Ndr n(model);
    for (const auto& m : run.messages) n.feed(m);
    n.flush();
    benchmark::DoNotOptimize(n.alerts().size());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * run.messages.size()));
}
BENCHMARK(BM_DetectorThroughput)->Unit(benchmark::kMillisecond);

static void BM_Training(benchmark::State& state) {
  auto cfg = bench::scenario("clean");
  for (auto _ : state) benchmark::DoNotOptimize(ndr::train(cfg.sim, cfg.detector, std::chrono::hours{state.range(0)}));
}
BENCHMARK(BM_Training)->Arg(1)->Arg(6)->Unit(benchmark::kMillisecond);
