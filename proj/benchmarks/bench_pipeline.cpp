// benchmarks/bench_pipeline.cpp
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "zr/alignment.hpp"
#include "zr/common.hpp"
#include "zr/features.hpp"
#include "zr/models.hpp"
#include "zr/neuralnet.hpp"
#include "zr/rng.hpp"

namespace {

zr::RowMatrixF random_frames(int n, int dim, std::uint64_t seed) {
  zr::Rng rng(seed);
  zr::RowMatrixF m(n, dim);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < dim; ++c) {
      m(r, c) = static_cast<float>(rng.gaussian());
    }
  }
  return m;
}

void BM_Mfcc(benchmark::State& state) {
  zr::Rng rng(7);
  std::vector<float> samples(16000);
  for (auto& s : samples) s = static_cast<float>(0.1 * rng.gaussian());
  for (auto _ : state) {
    benchmark::DoNotOptimize(zr::compute_mfcc(samples, 16000, "bench"));
  }
}
BENCHMARK(BM_Mfcc);

void BM_Dtw(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const zr::RowMatrixF a = random_frames(n, 39, 1);
  const zr::RowMatrixF b = random_frames(n + 7, 39, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(zr::dtw_align(a, b, zr::Metric::kCosine));
  }
}
BENCHMARK(BM_Dtw)->Arg(50)->Arg(100);

void BM_Forward(benchmark::State& state) {
  zr::NetworkSpec spec;
  spec.input_dim = 39;
  spec.seed = 3;
  for (int i = 0; i < 6; ++i) spec.layers.push_back({100, zr::Activation::kRelu});
  spec.layers.push_back({39, zr::Activation::kLinear});
  const zr::Parameters params = zr::init_parameters(spec);
  const Eigen::MatrixXd batch =
      random_frames(256, 39, 4).cast<double>().transpose();
  for (auto _ : state) {
    benchmark::DoNotOptimize(zr::forward(params, spec, batch));
  }
}
BENCHMARK(BM_Forward);

void BM_CaeStep(benchmark::State& state) {
  zr::CaeModel model = zr::make_cae_model(39, 9);
  zr::Optimizer opt = zr::Optimizer::adadelta();
  const Eigen::MatrixXd xa = random_frames(256, 39, 5).cast<double>().transpose();
  const Eigen::MatrixXd xb = random_frames(256, 39, 6).cast<double>().transpose();
  for (auto _ : state) {
    zr::CaeGradients grads;
    benchmark::DoNotOptimize(zr::cae_compute(model, xa, xb, {}, &grads));
    opt.step(zr::model_views(model), zr::grad_views(grads, false));
  }
}
BENCHMARK(BM_CaeStep);

}  // namespace

BENCHMARK_MAIN();
