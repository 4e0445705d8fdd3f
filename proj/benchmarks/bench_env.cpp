#include <benchmark/benchmark.h>

#include "uavwet/env.hpp"
#include "uavwet/rng.hpp"

using namespace uavwet;

namespace {
LoadedConfig bench_cfg(int uavs, int devices) {
  LoadedConfig c;
  c.world = WorldConfig::defaults();
  c.scenario = Scenario{};
  c.scenario.area_w = c.scenario.area_l = 200.0;
  c.scenario.num_uavs = uavs;
  c.scenario.num_devices = devices;
  c.scenario.device_x.clear();
  c.scenario.device_y.clear();
  for (int i = 0; i < devices; ++i) {
    c.scenario.device_x.push_back(200.0 * (i + 1) / (devices + 1));
    c.scenario.device_y.push_back(200.0 * (i + 1) / (devices + 1));
  }
  return c;
}
}  // namespace

static void BM_EnvStep(benchmark::State& state) {
  const LoadedConfig cfg = bench_cfg(static_cast<int>(state.range(0)),
                                     static_cast<int>(state.range(1)));
  Env env(cfg.world, cfg.scenario);
  env.reset(1);
  Rng rng(2);
  std::vector<AgentAction> acts(cfg.scenario.num_uavs);
  for (auto _ : state) {
    if (env.done()) env.reset(rng.next_u64());
    for (auto& a : acts) {
      a.v = rng.uniform(0.0, 20.0);
      a.phi = rng.uniform(0.0, 6.28);
      a.wet = rng.uniform() < 0.5;
    }
    benchmark::DoNotOptimize(env.step(acts));
  }
}
BENCHMARK(BM_EnvStep)->Args({2, 3})->Args({4, 6});

static void BM_Similarity(benchmark::State& state) {
  const LoadedConfig cfg = bench_cfg(4, 6);
  Env env(cfg.world, cfg.scenario);
  env.reset(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(env.similarity());
  }
}
BENCHMARK(BM_Similarity);
