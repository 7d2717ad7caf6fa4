#include <benchmark/benchmark.h>

#include <random>

#include "plseada/core/random.hpp"
#include "plseada/harmonizers/combat.hpp"
#include "plseada/metrics/image_metrics.hpp"
#include "plseada/nets/layers.hpp"
#include "plseada/nets/network.hpp"

using namespace plseada;
using nets::Tensor;

namespace {

template <typename T>
Tensor<T> random_tensor(Shape shape, std::uint64_t seed) {
  Tensor<T> t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(g(rng));
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  const auto channels = static_cast<std::size_t>(state.range(0));
  nets::Conv<float> conv(channels, channels, nets::ConvGeometry::make(2, 3, 1, 1));
  Rng rng(1);
  conv.init_parameters(rng);
  const auto x = random_tensor<float>({16, channels, 64, 64}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv.apply(x));
}
BENCHMARK(BM_Conv2dForward)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Conv2dBackward(benchmark::State& state) {
  nets::Conv<float> conv(8, 8, nets::ConvGeometry::make(2, 3, 1, 1));
  Rng rng(1);
  conv.init_parameters(rng);
  const auto x = random_tensor<float>({16, 8, 64, 64}, 2);
  const auto y = conv.forward(x);
  const auto g = random_tensor<float>(y.shape(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(conv.backward(g));
}
BENCHMARK(BM_Conv2dBackward)->Unit(benchmark::kMillisecond);

void BM_EncodeBatch(benchmark::State& state) {
  const auto bundle = nets::ModelBundle::create(nets::NetworkConfig{}, nets::ModelKind::PlSeAda, 1);
  const auto x = random_tensor<float>({32, 1, 64, 64}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(bundle.encode(x));
}
BENCHMARK(BM_EncodeBatch)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Shape shape{1, side, side};
  const auto a = random_tensor<float>(shape, 5);
  const auto b = random_tensor<float>(shape, 6);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::ssim(a.values(), b.values(), shape));
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(128);

void BM_CombatFitApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_tensor<double>({n, 20}, 7);
  std::vector<int> site(n);
  for (std::size_t i = 0; i < n; ++i) site[i] = static_cast<int>(i % 2);
  for (auto _ : state) {
    const auto model = harmonizers::combat_fit(x, site);
    benchmark::DoNotOptimize(harmonizers::combat_apply(model, x, site));
  }
}
BENCHMARK(BM_CombatFitApply)->Arg(2000);

}  // namespace
BENCHMARK_MAIN();
