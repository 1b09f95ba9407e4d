// OpenMP kernels. Work is split over independent output rows (or
// head/query pairs); each element keeps the reference reduction order.

#include <cmath>
#include <cstddef>
#include <vector>

#include "cloakvit/kernels.hpp"

namespace cloakvit::kernels::parallel {

using Index = std::ptrdiff_t;

void linear(std::span<const float> x, std::size_t rows, std::size_t in_dim,
            std::span<const float> w, std::span<const float> bias, std::size_t out_dim,
            std::span<float> out) {
#pragma omp parallel
  {
    std::vector<double> acc(out_dim);
#pragma omp for schedule(static)
    for (Index r = 0; r < static_cast<Index>(rows); ++r) {
      std::fill(acc.begin(), acc.end(), 0.0);
      const float* xr = x.data() + r * in_dim;
      // i-outer / o-inner streams each weight row once; every acc[o] still
      // sums over i in increasing order.
      for (std::size_t i = 0; i < in_dim; ++i) {
        const double xi = xr[i];
        const float* wi = w.data() + i * out_dim;
        for (std::size_t o = 0; o < out_dim; ++o) acc[o] += xi * static_cast<double>(wi[o]);
      }
      float* yr = out.data() + r * out_dim;
      for (std::size_t o = 0; o < out_dim; ++o) {
        yr[o] = static_cast<float>(acc[o] + static_cast<double>(bias[o]));
      }
    }
  }
}

void layer_norm(std::span<const float> x, std::size_t rows, std::size_t dim,
                std::span<const float> gamma, std::span<const float> beta, double eps,
                std::span<float> out) {
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < static_cast<Index>(rows); ++r) {
    const float* row = x.data() + r * dim;
    double sum = 0.0;
    for (std::size_t i = 0; i < dim; ++i) sum += row[i];
    const double mean = sum / static_cast<double>(dim);
    double sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = row[i] - mean;
      sq += d * d;
    }
    const double inv = 1.0 / std::sqrt(sq / static_cast<double>(dim) + eps);
    float* y = out.data() + r * dim;
    for (std::size_t i = 0; i < dim; ++i) {
      y[i] = static_cast<float>((row[i] - mean) * inv * gamma[i] + static_cast<double>(beta[i]));
    }
  }
}

void attention(std::span<const float> q, std::span<const float> k, std::span<const float> v,
               std::size_t tokens, std::size_t heads, std::size_t head_dim,
               std::span<float> out) {
  const std::size_t width = heads * head_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
#pragma omp parallel
  {
    std::vector<double> p(tokens);
    std::vector<double> acc(head_dim);
#pragma omp for collapse(2) schedule(static)
    for (Index h = 0; h < static_cast<Index>(heads); ++h) {
      for (Index i = 0; i < static_cast<Index>(tokens); ++i) {
        const float* qi = q.data() + i * width + h * head_dim;
        double max_score = -INFINITY;
        for (std::size_t j = 0; j < tokens; ++j) {
          const float* kj = k.data() + j * width + h * head_dim;
          double dot = 0.0;
          for (std::size_t d = 0; d < head_dim; ++d) {
            dot += static_cast<double>(qi[d]) * static_cast<double>(kj[d]);
          }
          p[j] = dot * scale;
          if (p[j] > max_score) max_score = p[j];
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < tokens; ++j) {
          p[j] = std::exp(p[j] - max_score);
          sum += p[j];
        }
        for (std::size_t j = 0; j < tokens; ++j) p[j] /= sum;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t j = 0; j < tokens; ++j) {
          const float* vj = v.data() + j * width + h * head_dim;
          for (std::size_t d = 0; d < head_dim; ++d) acc[d] += p[j] * static_cast<double>(vj[d]);
        }
        float* oi = out.data() + i * width + h * head_dim;
        for (std::size_t d = 0; d < head_dim; ++d) oi[d] = static_cast<float>(acc[d]);
      }
    }
  }
}

void gelu(std::span<float> x) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < static_cast<Index>(x.size()); ++i) {
    const double v = x[i];
    x[i] = static_cast<float>(0.5 * v * (1.0 + std::erf(v * M_SQRT1_2)));
  }
}

void add(std::span<float> x, std::span<const float> y) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < static_cast<Index>(x.size()); ++i) {
    x[i] = static_cast<float>(static_cast<double>(x[i]) + static_cast<double>(y[i]));
  }
}

}  // namespace cloakvit::kernels::parallel
