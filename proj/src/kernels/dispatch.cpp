#include "cloakvit/kernels.hpp"

namespace cloakvit::kernels {

void linear(Backend backend, std::span<const float> x, std::size_t rows, std::size_t in_dim,
            std::span<const float> w, std::span<const float> bias, std::size_t out_dim,
            std::span<float> out) {
  if (backend == Backend::Serial) {
    serial::linear(x, rows, in_dim, w, bias, out_dim, out);
  } else {
    parallel::linear(x, rows, in_dim, w, bias, out_dim, out);
  }
}

void layer_norm(Backend backend, std::span<const float> x, std::size_t rows, std::size_t dim,
                std::span<const float> gamma, std::span<const float> beta, double eps,
                std::span<float> out) {
  if (backend == Backend::Serial) {
    serial::layer_norm(x, rows, dim, gamma, beta, eps, out);
  } else {
    parallel::layer_norm(x, rows, dim, gamma, beta, eps, out);
  }
}

void attention(Backend backend, std::span<const float> q, std::span<const float> k,
               std::span<const float> v, std::size_t tokens, std::size_t heads,
               std::size_t head_dim, std::span<float> out) {
  if (backend == Backend::Serial) {
    serial::attention(q, k, v, tokens, heads, head_dim, out);
  } else {
    parallel::attention(q, k, v, tokens, heads, head_dim, out);
  }
}

void gelu(Backend backend, std::span<float> x) {
  backend == Backend::Serial ? serial::gelu(x) : parallel::gelu(x);
}

void add(Backend backend, std::span<float> x, std::span<const float> y) {
  backend == Backend::Serial ? serial::add(x, y) : parallel::add(x, y);
}

}  // namespace cloakvit::kernels
