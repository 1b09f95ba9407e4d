#pragma once

// Straight-line scalar ViT forward pass used as a test oracle. Written from
// the model formulas directly and shares no code with the library kernels,
// patch extraction or normalization: everything is computed in double with
// explicit index arithmetic on the raw image.

#include <cmath>
#include <vector>

#include "cloakvit/tensor.hpp"
#include "cloakvit/vit.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix matmul_in_out(const Matrix& x, const cloakvit::Tensor& w,
                            const cloakvit::Tensor& b) {
  const std::size_t in = w.shape[0], out = w.shape[1];
  Matrix y(x.size(), std::vector<double>(out));
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (std::size_t o = 0; o < out; ++o) {
      double s = b.data[o];
      for (std::size_t i = 0; i < in; ++i) s += x[t][i] * w.data[i * out + o];
      y[t][o] = s;
    }
  }
  return y;
}

inline Matrix layer_norm(const Matrix& x, const cloakvit::Tensor& g, const cloakvit::Tensor& b) {
  Matrix y = x;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double n = static_cast<double>(x[t].size());
    double mu = 0;
    for (double v : x[t]) mu += v;
    mu /= n;
    double var = 0;
    for (double v : x[t]) var += (v - mu) * (v - mu);
    var /= n;
    for (std::size_t i = 0; i < x[t].size(); ++i) {
      y[t][i] = (x[t][i] - mu) / std::sqrt(var + 1e-6) * g.data[i] + b.data[i];
    }
  }
  return y;
}

inline std::vector<double> forward(const cloakvit::ModelWeights& m, const cloakvit::ViTConfig& cfg,
                                   const cloakvit::Image& img) {
  const std::size_t P = cfg.patch_size, C = cfg.channels, E = cfg.embed_dim;
  const std::size_t side = cfg.image_size / P;
  const std::size_t heads = cfg.heads, hd = E / heads;

  // Patches in row-major block order, samples (row, col, channel).
  Matrix patches;
  for (std::size_t by = 0; by < side; ++by) {
    for (std::size_t bx = 0; bx < side; ++bx) {
      std::vector<double> p;
      for (std::size_t r = 0; r < P; ++r) {
        for (std::size_t c = 0; c < P; ++c) {
          for (std::size_t ch = 0; ch < C; ++ch) {
            const double s = img.data[((by * P + r) * img.width + bx * P + c) * C + ch];
            p.push_back((s / 255.0 - cfg.norm.mean[ch]) / cfg.norm.std[ch]);
          }
        }
      }
      patches.push_back(p);
    }
  }

  Matrix x = matmul_in_out(patches, m.patch_embed_weight, m.patch_embed_bias);
  x.insert(x.begin(), std::vector<double>(m.cls_token.data.begin(), m.cls_token.data.end()));
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (std::size_t i = 0; i < E; ++i) x[t][i] += m.pos_embed.data[t * E + i];
  }

  for (const auto& b : m.blocks) {
    Matrix h = layer_norm(x, b.ln1_weight, b.ln1_bias);
    Matrix q = matmul_in_out(h, b.q_weight, b.q_bias);
    Matrix k = matmul_in_out(h, b.k_weight, b.k_bias);
    Matrix v = matmul_in_out(h, b.v_weight, b.v_bias);
    Matrix att(x.size(), std::vector<double>(E, 0.0));
    for (std::size_t hh = 0; hh < heads; ++hh) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<double> s(x.size());
        double mx = -1e300;
        for (std::size_t j = 0; j < x.size(); ++j) {
          double d = 0;
          for (std::size_t u = 0; u < hd; ++u) d += q[i][hh * hd + u] * k[j][hh * hd + u];
          s[j] = d / std::sqrt(static_cast<double>(hd));
          mx = std::max(mx, s[j]);
        }
        double z = 0;
        for (auto& e : s) z += (e = std::exp(e - mx));
        for (std::size_t j = 0; j < x.size(); ++j) {
          for (std::size_t u = 0; u < hd; ++u) att[i][hh * hd + u] += s[j] / z * v[j][hh * hd + u];
        }
      }
    }
    Matrix o = matmul_in_out(att, b.proj_weight, b.proj_bias);
    for (std::size_t t = 0; t < x.size(); ++t)
      for (std::size_t i = 0; i < E; ++i) x[t][i] += o[t][i];

    h = layer_norm(x, b.ln2_weight, b.ln2_bias);
    Matrix f = matmul_in_out(h, b.fc1_weight, b.fc1_bias);
    for (auto& row : f)
      for (auto& e : row) e = 0.5 * e * (1.0 + std::erf(e / std::sqrt(2.0)));
    o = matmul_in_out(f, b.fc2_weight, b.fc2_bias);
    for (std::size_t t = 0; t < x.size(); ++t)
      for (std::size_t i = 0; i < E; ++i) x[t][i] += o[t][i];
  }

  const Matrix cls = layer_norm(Matrix{x[0]}, m.norm_weight, m.norm_bias);
  std::vector<double> logits(cfg.num_classes);
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    double s = m.head_bias.data[c];
    for (std::size_t i = 0; i < E; ++i) s += m.head_weight.data[c * E + i] * cls[0][i];
    logits[c] = s;
  }
  return logits;
}

}  // namespace oracle
