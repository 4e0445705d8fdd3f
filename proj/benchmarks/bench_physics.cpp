#include <benchmark/benchmark.h>

#include "uavwet/channel.hpp"
#include "uavwet/energy.hpp"

using namespace uavwet;

static void BM_ChannelGain(benchmark::State& state) {
  const ChannelParams ch;
  const Position3 dev{0, 0, 0};
  double x = 5.0;
  for (auto _ : state) {
    x = x > 150.0 ? 5.0 : x + 0.1;
    benchmark::DoNotOptimize(avg_channel_gain({x, 3.0, 5.0}, dev, ch));
  }
}
BENCHMARK(BM_ChannelGain);

static void BM_PropulsionPower(benchmark::State& state) {
  const PropulsionParams p;
  double v = 0.0;
  for (auto _ : state) {
    v = v > 20.0 ? 0.0 : v + 0.05;
    benchmark::DoNotOptimize(propulsion_power(v, p));
  }
}
BENCHMARK(BM_PropulsionPower);

static void BM_HarvestCurve(benchmark::State& state) {
  const HarvesterParams h;
  double p = 0.0;
  for (auto _ : state) {
    p = p > 2.0 * h.p_sat ? 0.0 : p + 1e-5;
    benchmark::DoNotOptimize(harvest_dc_power(p, h));
  }
}
BENCHMARK(BM_HarvestCurve);
