#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cloakvit/kernels.hpp"
#include "cloakvit/tensor.hpp"

namespace cloakvit {

struct ViTConfig {
  std::size_t image_size = 224;
  std::size_t patch_size = 16;
  std::size_t channels = 3;
  std::size_t embed_dim = 384;
  std::size_t depth = 12;
  std::size_t heads = 6;
  double mlp_ratio = 4.0;
  std::size_t num_classes = 1000;
  NormalizationConfig norm;

  static ViTConfig vit_s16(std::size_t num_classes = 1000);
  /// 64px images, 16px patches, dim 64, depth 2, 4 heads, 4 classes.
  static ViTConfig toy();

  std::size_t grid_side() const noexcept { return image_size / patch_size; }
  std::size_t num_patches() const noexcept { return grid_side() * grid_side(); }
  std::size_t tokens() const noexcept { return num_patches() + 1; }
  std::size_t patch_dim() const noexcept { return patch_size * patch_size * channels; }
  std::size_t head_dim() const noexcept { return embed_dim / heads; }
  std::size_t mlp_hidden() const noexcept;

  /// Throws ErrorCode::Config describing the first violated invariant.
  void validate() const;

  friend bool operator==(const ViTConfig&, const ViTConfig&) = default;
};

inline constexpr double kLayerNormEps = 1e-6;

struct BlockWeights {
  Tensor ln1_weight, ln1_bias;
  Tensor q_weight, q_bias;
  Tensor k_weight, k_bias;
  Tensor v_weight, v_bias;
  Tensor proj_weight, proj_bias;
  Tensor ln2_weight, ln2_bias;
  Tensor fc1_weight, fc1_bias;
  Tensor fc2_weight, fc2_bias;

  friend bool operator==(const BlockWeights&, const BlockWeights&) = default;
};

/// Linear weights are stored in_dim x out_dim, except the classifier head
/// which is num_classes x embed_dim.
struct ModelWeights {
  Tensor patch_embed_weight;  // patch_dim x embed_dim
  Tensor patch_embed_bias;
  Tensor cls_token;
  Tensor pos_embed;  // tokens x embed_dim, row 0 belongs to the class token
  std::vector<BlockWeights> blocks;
  Tensor norm_weight, norm_bias;
  Tensor head_weight;  // num_classes x embed_dim
  Tensor head_bias;

  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> shape;
};

/// Canonical tensor order. Serialization, random_init and param_count all use it.
std::vector<TensorSpec> tensor_table(const ViTConfig& cfg);

/// Visit every tensor in canonical order as fn(name, tensor).
template <typename Model, typename Fn>
void for_each_tensor(Model& model, Fn&& fn) {
  fn(std::string("patch_embed.weight"), model.patch_embed_weight);
  fn(std::string("patch_embed.bias"), model.patch_embed_bias);
  fn(std::string("cls_token"), model.cls_token);
  fn(std::string("pos_embed"), model.pos_embed);
  for (std::size_t l = 0; l < model.blocks.size(); ++l) {
    auto& b = model.blocks[l];
    const std::string p = "blocks." + std::to_string(l) + ".";
    fn(p + "ln1.weight", b.ln1_weight);
    fn(p + "ln1.bias", b.ln1_bias);
    fn(p + "attn.q.weight", b.q_weight);
    fn(p + "attn.q.bias", b.q_bias);
    fn(p + "attn.k.weight", b.k_weight);
    fn(p + "attn.k.bias", b.k_bias);
    fn(p + "attn.v.weight", b.v_weight);
    fn(p + "attn.v.bias", b.v_bias);
    fn(p + "attn.proj.weight", b.proj_weight);
    fn(p + "attn.proj.bias", b.proj_bias);
    fn(p + "ln2.weight", b.ln2_weight);
    fn(p + "ln2.bias", b.ln2_bias);
    fn(p + "mlp.fc1.weight", b.fc1_weight);
    fn(p + "mlp.fc1.bias", b.fc1_bias);
    fn(p + "mlp.fc2.weight", b.fc2_weight);
    fn(p + "mlp.fc2.bias", b.fc2_bias);
  }
  fn(std::string("norm.weight"), model.norm_weight);
  fn(std::string("norm.bias"), model.norm_bias);
  fn(std::string("head.weight"), model.head_weight);
  fn(std::string("head.bias"), model.head_bias);
}

/// Zero-filled weights with the shapes implied by `cfg`.
ModelWeights zero_weights(const ViTConfig& cfg);

/// Shape table check plus finiteness; throws ShapeTable or NonFinite.
void validate_weights(const ModelWeights& model, const ViTConfig& cfg);

std::uint64_t param_count(const ViTConfig& cfg);
std::uint64_t element_count(const ModelWeights& model);

/// Layer-norm weights are 1 and biases 0; every other element is drawn in
/// canonical order from one SplitMix64 stream: float(-0.02 + 0.04 * u),
/// u = (r >> 11) * 2^-53.
ModelWeights random_init(const ViTConfig& cfg, std::uint64_t seed);

std::vector<float> forward(const ModelWeights& model, const ViTConfig& cfg, const Image& img,
                           kernels::Backend backend = kernels::Backend::Parallel);

/// Forward pass starting from already extracted (normalized) patches, N x D.
std::vector<float> forward_patches(const ModelWeights& model, const ViTConfig& cfg,
                                   const Tensor& patches,
                                   kernels::Backend backend = kernels::Backend::Parallel);

std::size_t argmax(const std::vector<float>& logits);

}  // namespace cloakvit
