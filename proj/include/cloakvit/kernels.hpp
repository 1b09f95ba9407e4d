#pragma once

#include <cstddef>
#include <span>

// Numerical kernels of the ViT forward pass. Two implementations exist:
// `serial` is the straightforward reference kept for testing, `parallel`
// distributes rows across OpenMP threads. Every output element is reduced in
// the same order by both, in double precision, so results are bit-identical
// for any thread count.

namespace cloakvit::kernels {

enum class Backend { Serial, Parallel };

/// out[r, o] = bias[o] + sum_i x[r, i] * w[i, o]; w is in_dim x out_dim.
void linear(Backend backend, std::span<const float> x, std::size_t rows, std::size_t in_dim,
            std::span<const float> w, std::span<const float> bias, std::size_t out_dim,
            std::span<float> out);

/// Per-row layer normalization (population variance).
void layer_norm(Backend backend, std::span<const float> x, std::size_t rows, std::size_t dim,
                std::span<const float> gamma, std::span<const float> beta, double eps,
                std::span<float> out);

/// Multi-head scaled dot-product attention without masking. q, k, v and out
/// are tokens x (heads * head_dim) with heads laid out contiguously.
void attention(Backend backend, std::span<const float> q, std::span<const float> k,
               std::span<const float> v, std::size_t tokens, std::size_t heads,
               std::size_t head_dim, std::span<float> out);

/// Exact erf-form GELU.
void gelu(Backend backend, std::span<float> x);

/// x += y
void add(Backend backend, std::span<float> x, std::span<const float> y);

namespace serial {
void linear(std::span<const float> x, std::size_t rows, std::size_t in_dim,
            std::span<const float> w, std::span<const float> bias, std::size_t out_dim,
            std::span<float> out);
void layer_norm(std::span<const float> x, std::size_t rows, std::size_t dim,
                std::span<const float> gamma, std::span<const float> beta, double eps,
                std::span<float> out);
void attention(std::span<const float> q, std::span<const float> k, std::span<const float> v,
               std::size_t tokens, std::size_t heads, std::size_t head_dim, std::span<float> out);
void gelu(std::span<float> x);
void add(std::span<float> x, std::span<const float> y);
}  // namespace serial

namespace parallel {
void linear(std::span<const float> x, std::size_t rows, std::size_t in_dim,
            std::span<const float> w, std::span<const float> bias, std::size_t out_dim,
            std::span<float> out);
void layer_norm(std::span<const float> x, std::size_t rows, std::size_t dim,
                std::span<const float> gamma, std::span<const float> beta, double eps,
                std::span<float> out);
void attention(std::span<const float> q, std::span<const float> k, std::span<const float> v,
               std::size_t tokens, std::size_t heads, std::size_t head_dim, std::span<float> out);
void gelu(std::span<float> x);
void add(std::span<float> x, std::span<const float> y);
}  // namespace parallel

}  // namespace cloakvit::kernels
