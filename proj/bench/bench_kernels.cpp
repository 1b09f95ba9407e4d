#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cloakvit/kernels.hpp"
#include "cloakvit/vit.hpp"

using namespace cloakvit;
using kernels::Backend;

namespace {

std::vector<float> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

Image noise_image(std::size_t side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Image img(side, side, 3);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng() >> 56);
  return img;
}

// ViT-S/16 token-wise linear: 197 x 384 -> 1536.
void BM_Linear(benchmark::State& state, Backend backend) {
  const std::size_t rows = 197, in = 384, out = 1536;
  const auto x = noise(rows * in, 1), w = noise(in * out, 2), b = noise(out, 3);
  std::vector<float> y(rows * out);
  for (auto _ : state) {
    kernels::linear(backend, x, rows, in, w, b, out, y);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_Attention(benchmark::State& state, Backend backend) {
  const std::size_t tokens = 197, heads = 6, hd = 64;
  const auto q = noise(tokens * heads * hd, 4), k = noise(tokens * heads * hd, 5),
             v = noise(tokens * heads * hd, 6);
  std::vector<float> o(tokens * heads * hd);
  for (auto _ : state) {
    kernels::attention(backend, q, k, v, tokens, heads, hd, o);
    benchmark::DoNotOptimize(o.data());
  }
}

void BM_ForwardToy(benchmark::State& state, Backend backend) {
  const ViTConfig cfg = ViTConfig::toy();
  const ModelWeights m = random_init(cfg, 1);
  const Image img = noise_image(cfg.image_size, 2);
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, cfg, img, backend));
}

void BM_ForwardVitS16(benchmark::State& state, Backend backend) {
  const ViTConfig cfg = ViTConfig::vit_s16(4);
  const ModelWeights m = random_init(cfg, 1);
  const Image img = noise_image(cfg.image_size, 2);
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, cfg, img, backend));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Linear, serial, Backend::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Linear, parallel, Backend::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Attention, serial, Backend::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Attention, parallel, Backend::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ForwardToy, serial, Backend::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ForwardToy, parallel, Backend::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ForwardVitS16, serial, Backend::Serial)->Unit(benchmark::kMillisecond)->Iterations(2);
BENCHMARK_CAPTURE(BM_ForwardVitS16, parallel, Backend::Parallel)->Unit(benchmark::kMillisecond)->Iterations(2);

BENCHMARK_MAIN();
