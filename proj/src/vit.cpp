#include "cloakvit/vit.hpp"

#include <cmath>
#include <string>

#include "cloakvit/error.hpp"
#include "cloakvit/permkey.hpp"

namespace cloakvit {

ViTConfig ViTConfig::vit_s16(std::size_t num_classes) {
  ViTConfig cfg;
  cfg.num_classes = num_classes;
  return cfg;
}

ViTConfig ViTConfig::toy() {
  ViTConfig cfg;
  cfg.image_size = 64;
  cfg.patch_size = 16;
  cfg.embed_dim = 64;
  cfg.depth = 2;
  cfg.heads = 4;
  cfg.mlp_ratio = 4.0;
  cfg.num_classes = 4;
  return cfg;
}

std::size_t ViTConfig::mlp_hidden() const noexcept {
  return static_cast<std::size_t>(std::llround(static_cast<double>(embed_dim) * mlp_ratio));
}

void ViTConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::Config, msg); };
  if (patch_size == 0 || image_size == 0) fail("image and patch size must be positive");
  if (image_size % patch_size != 0) {
    fail("image_size " + std::to_string(image_size) + " is not divisible by patch_size " +
         std::to_string(patch_size));
  }
  if (channels == 0) fail("channels must be positive");
  if (embed_dim == 0 || heads == 0) fail("embed_dim and heads must be positive");
  if (embed_dim % heads != 0) {
    fail("embed_dim " + std::to_string(embed_dim) + " is not divisible by heads " +
         std::to_string(heads));
  }
  if (!(mlp_ratio > 0.0) || !std::isfinite(mlp_ratio)) fail("mlp_ratio must be positive");
  if (static_cast<double>(mlp_hidden()) != static_cast<double>(embed_dim) * mlp_ratio) {
    fail("embed_dim * mlp_ratio must be an integer");
  }
  if (num_classes == 0) fail("num_classes must be positive");
  norm.validate(channels);
}

std::vector<TensorSpec> tensor_table(const ViTConfig& cfg) {
  const std::size_t e = cfg.embed_dim;
  const std::size_t hidden = cfg.mlp_hidden();
  std::vector<TensorSpec> t{
      {"patch_embed.weight", {cfg.patch_dim(), e}},
      {"patch_embed.bias", {e}},
      {"cls_token", {e}},
      {"pos_embed", {cfg.tokens(), e}},
  };
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    const std::string p = "blocks." + std::to_string(l) + ".";
    t.push_back({p + "ln1.weight", {e}});
    t.push_back({p + "ln1.bias", {e}});
    for (const char* n : {"q", "k", "v", "proj"}) {
      t.push_back({p + "attn." + n + ".weight", {e, e}});
      t.push_back({p + "attn." + n + ".bias", {e}});
    }
    t.push_back({p + "ln2.weight", {e}});
    t.push_back({p + "ln2.bias", {e}});
    t.push_back({p + "mlp.fc1.weight", {e, hidden}});
    t.push_back({p + "mlp.fc1.bias", {hidden}});
    t.push_back({p + "mlp.fc2.weight", {hidden, e}});
    t.push_back({p + "mlp.fc2.bias", {e}});
  }
  t.push_back({"norm.weight", {e}});
  t.push_back({"norm.bias", {e}});
  t.push_back({"head.weight", {cfg.num_classes, e}});
  t.push_back({"head.bias", {cfg.num_classes}});
  return t;
}

ModelWeights zero_weights(const ViTConfig& cfg) {
  cfg.validate();
  ModelWeights m;
  m.blocks.resize(cfg.depth);
  const auto table = tensor_table(cfg);
  std::size_t idx = 0;
  for_each_tensor(m, [&](const std::string&, Tensor& t) { t = Tensor(table[idx++].shape); });
  return m;
}

void validate_weights(const ModelWeights& model, const ViTConfig& cfg) {
  const auto table = tensor_table(cfg);
  if (model.blocks.size() != cfg.depth) {
    throw Error(ErrorCode::ShapeTable, "model has " + std::to_string(model.blocks.size()) +
                                           " blocks, config expects " + std::to_string(cfg.depth));
  }
  std::size_t idx = 0;
  for_each_tensor(model, [&](const std::string& name, const Tensor& t) {
    const auto& spec = table[idx++];
    if (t.shape != spec.shape || t.data.size() != Tensor::element_count(spec.shape)) {
      throw Error(ErrorCode::ShapeTable, "tensor '" + name + "' has the wrong shape");
    }
    for (float v : t.data) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFinite, "tensor '" + name + "' contains a non-finite value");
      }
    }
  });
}

std::uint64_t param_count(const ViTConfig& cfg) {
  // Closed form per tensor group.
  const std::uint64_t e = cfg.embed_dim;
  const std::uint64_t hidden = cfg.mlp_hidden();
  const std::uint64_t patch_embed = cfg.patch_dim() * e + e;
  const std::uint64_t embeddings = e + cfg.tokens() * e;
  const std::uint64_t per_block = 2 * (2 * e)          // two layer norms
                                  + 4 * (e * e + e)    // q, k, v, proj
                                  + (e * hidden + hidden) + (hidden * e + e);
  const std::uint64_t head = 2 * e + cfg.num_classes * e + cfg.num_classes;
  return patch_embed + embeddings + cfg.depth * per_block + head;
}

std::uint64_t element_count(const ModelWeights& model) {
  std::uint64_t n = 0;
  for_each_tensor(model, [&](const std::string&, const Tensor& t) { n += t.data.size(); });
  return n;
}

namespace {

bool is_layer_norm(const std::string& name) {
  return name.starts_with("norm.") || name.find(".ln1.") != std::string::npos ||
         name.find(".ln2.") != std::string::npos;
}

}  // namespace

ModelWeights random_init(const ViTConfig& cfg, std::uint64_t seed) {
  ModelWeights m = zero_weights(cfg);
  SplitMix64 rng(seed);
  for_each_tensor(m, [&](const std::string& name, Tensor& t) {
    if (is_layer_norm(name)) {
      const float fill = name.ends_with(".weight") ? 1.0f : 0.0f;
      std::fill(t.data.begin(), t.data.end(), fill);
      return;
    }
    for (auto& v : t.data) v = static_cast<float>(-0.02 + 0.04 * rng.uniform01());
  });
  return m;
}

std::vector<float> forward_patches(const ModelWeights& model, const ViTConfig& cfg,
                                   const Tensor& patches, kernels::Backend backend) {
  cfg.validate();
  validate_weights(model, cfg);
  const std::size_t n = cfg.num_patches();
  const std::size_t tokens = cfg.tokens();
  const std::size_t e = cfg.embed_dim;
  const std::size_t hidden = cfg.mlp_hidden();
  if (patches.rank() != 2 || patches.shape[0] != n || patches.shape[1] != cfg.patch_dim()) {
    throw Error(ErrorCode::Shape, "patch tensor does not match the model configuration");
  }

  std::vector<float> x(tokens * e);
  std::span<float> x_span(x);
  kernels::linear(backend, patches.data, n, cfg.patch_dim(), model.patch_embed_weight.data,
                  model.patch_embed_bias.data, e, x_span.subspan(e));
  std::copy(model.cls_token.data.begin(), model.cls_token.data.end(), x.begin());
  kernels::add(backend, x_span, model.pos_embed.data);

  std::vector<float> h(tokens * e), q(tokens * e), k(tokens * e), v(tokens * e),
      attn(tokens * e), proj(tokens * e), mlp(tokens * hidden);
  for (const BlockWeights& b : model.blocks) {
    kernels::layer_norm(backend, x, tokens, e, b.ln1_weight.data, b.ln1_bias.data, kLayerNormEps,
                        h);
    kernels::linear(backend, h, tokens, e, b.q_weight.data, b.q_bias.data, e, q);
    kernels::linear(backend, h, tokens, e, b.k_weight.data, b.k_bias.data, e, k);
    kernels::linear(backend, h, tokens, e, b.v_weight.data, b.v_bias.data, e, v);
    kernels::attention(backend, q, k, v, tokens, cfg.heads, cfg.head_dim(), attn);
    kernels::linear(backend, attn, tokens, e, b.proj_weight.data, b.proj_bias.data, e, proj);
    kernels::add(backend, x, proj);

    kernels::layer_norm(backend, x, tokens, e, b.ln2_weight.data, b.ln2_bias.data, kLayerNormEps,
                        h);
    kernels::linear(backend, h, tokens, e, b.fc1_weight.data, b.fc1_bias.data, hidden, mlp);
    kernels::gelu(backend, mlp);
    kernels::linear(backend, mlp, tokens, hidden, b.fc2_weight.data, b.fc2_bias.data, e, proj);
    kernels::add(backend, x, proj);
  }

  // Only the class token reaches the head.
  std::vector<float> cls(e);
  kernels::layer_norm(backend, std::span<const float>(x).first(e), 1, e, model.norm_weight.data,
                      model.norm_bias.data, kLayerNormEps, cls);
  std::vector<float> logits(cfg.num_classes);
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    const float* w = model.head_weight.data.data() + c * e;
    double acc = 0.0;
    for (std::size_t i = 0; i < e; ++i) acc += static_cast<double>(w[i]) * cls[i];
    logits[c] = static_cast<float>(acc + static_cast<double>(model.head_bias.data[c]));
  }
  return logits;
}

std::vector<float> forward(const ModelWeights& model, const ViTConfig& cfg, const Image& img,
                           kernels::Backend backend) {
  cfg.validate();
  if (img.height != cfg.image_size || img.width != cfg.image_size ||
      img.channels != cfg.channels) {
    throw Error(ErrorCode::Shape,
                "image is " + std::to_string(img.height) + "x" + std::to_string(img.width) + "x" +
                    std::to_string(img.channels) + ", model expects " +
                    std::to_string(cfg.image_size) + "x" + std::to_string(cfg.image_size) + "x" +
                    std::to_string(cfg.channels));
  }
  const Tensor normalized = normalize(img, cfg.norm);
  return forward_patches(model, cfg, extract_patches(normalized, cfg.patch_size).patches,
                         backend);
}

std::size_t argmax(const std::vector<float>& logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

}  // namespace cloakvit
