#include <benchmark/benchmark.h>

#include "uavwet/nn.hpp"
#include "uavwet/rng.hpp"
#include "uavwet/tensor.hpp"

using namespace uavwet;
using namespace uavwet::ad;

static void BM_MlpForwardBackward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  Rng rng(3);
  Mlp net("bench", {9, width, width, 1}, Activation::Relu);
  net.init(rng);
  Mat x(128, 9);
  for (double& v : x.v) v = rng.uniform(-1.0, 1.0);

  for (auto _ : state) {
    Tape t;
    const int y = net.forward(t, t.constant(x));
    const int loss = t.mean(t.square(y));
    net.zero_grads();
    t.backward(loss);
    benchmark::DoNotOptimize(t.scalar_val(loss));
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(64)->Arg(128)->Arg(256);

static void BM_AttentionForward(benchmark::State& state) {
  Rng rng(5);
  const int u = 4, m = 15;
  AttentionBlock blk("bench.att", m);
  blk.init(rng);
  Mat o(u, m), z(u, u);
  for (double& v : o.v) v = rng.uniform(-1.0, 1.0);
  for (double& v : z.v) v = rng.uniform(0.0, 1.0);

  for (auto _ : state) {
    benchmark::DoNotOptimize(attention_features_eval(o, z, blk));
  }
}
BENCHMARK(BM_AttentionForward);
