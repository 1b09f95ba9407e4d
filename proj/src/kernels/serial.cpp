// Reference kernels: plain loops, one output element at a time.

#include <cmath>
#include <vector>

#include "cloakvit/kernels.hpp"

namespace cloakvit::kernels::serial {

void linear(std::span<const float> x, std::size_t rows, std::size_t in_dim,
            std::span<const float> w, std::span<const float> bias, std::size_t out_dim,
            std::span<float> out) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) {
        acc += static_cast<double>(x[r * in_dim + i]) * static_cast<double>(w[i * out_dim + o]);
      }
      out[r * out_dim + o] = static_cast<float>(acc + static_cast<double>(bias[o]));
    }
  }
}

void layer_norm(std::span<const float> x, std::size_t rows, std::size_t dim,
                std::span<const float> gamma, std::span<const float> beta, double eps,
                std::span<float> out) {
  for (std::size_t r = 0; r < rows; ++r) {
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
    for (std::size_t i = 0; i < dim; ++i) {
      out[r * dim + i] =
          static_cast<float>((row[i] - mean) * inv * gamma[i] + static_cast<double>(beta[i]));
    }
  }
}

void attention(std::span<const float> q, std::span<const float> k, std::span<const float> v,
               std::size_t tokens, std::size_t heads, std::size_t head_dim,
               std::span<float> out) {
  const std::size_t width = heads * head_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<double> p(tokens);
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < tokens; ++i) {
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
      for (std::size_t d = 0; d < head_dim; ++d) {
        double acc = 0.0;
        for (std::size_t j = 0; j < tokens; ++j) {
          acc += p[j] * static_cast<double>(v[j * width + h * head_dim + d]);
        }
        out[i * width + h * head_dim + d] = static_cast<float>(acc);
      }
    }
  }
}

void gelu(std::span<float> x) {
  for (auto& e : x) {
    const double v = e;
    e = static_cast<float>(0.5 * v * (1.0 + std::erf(v * M_SQRT1_2)));
  }
}

void add(std::span<float> x, std::span<const float> y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<float>(static_cast<double>(x[i]) + static_cast<double>(y[i]));
  }
}

}  // namespace cloakvit::kernels::serial
