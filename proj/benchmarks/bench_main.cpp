#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <vector>

#include "anchorprobe/dimension.hpp"
#include "anchorprobe/distributions.hpp"
#include "anchorprobe/image.hpp"
#include "anchorprobe/probe.hpp"
#include "anchorprobe/rng.hpp"
#include "anchorprobe/stats.hpp"
#include "anchorprobe/synthetic.hpp"

using namespace anchorprobe;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.normal();
  return x;
}

void BM_TukeyHsd(benchmark::State& state) {
  CounterRng rng(1);
  std::vector<stats::LabeledGroup> groups;
  for (int k = 0; k < 7; ++k) {
    stats::LabeledGroup g{std::to_string(k), {}};
    for (int i = 0; i < 100; ++i) g.values.push_back(rng.normal() + 0.1 * k);
    groups.push_back(g);
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::tukey_hsd(groups));
}
BENCHMARK(BM_TukeyHsd);

void BM_SoftmaxTrain(benchmark::State& state) {
  const auto n = state.range(0);
  Eigen::MatrixXd x = gaussian(n, 64, 2);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 6);
    x(i, y[i]) += 2.0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(train_softmax_probe(x, y, 1.0));
}
BENCHMARK(BM_SoftmaxTrain)->Arg(240)->Arg(960)->Unit(benchmark::kMillisecond);

void BM_RandomizedPca(benchmark::State& state) {
  const Eigen::MatrixXd x = gaussian(1200, state.range(0), 3);
  PcaOptions o;
  o.method = PcaMethod::randomized;
  for (auto _ : state) benchmark::DoNotOptimize(pca_spectrum(x, 10, o));
}
BENCHMARK(BM_RandomizedPca)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_GaussianBlur(benchmark::State& state) {
  const auto img = synthetic::base_image(640, 480, 4, "bench");
  for (auto _ : state) benchmark::DoNotOptimize(apply_gaussian_blur(img, static_cast<double>(state.range(0))));
}
BENCHMARK(BM_GaussianBlur)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
