#include "cloakvit/model_transform.hpp"

#include <cmath>
#include <string>

#include "cloakvit/error.hpp"

namespace cloakvit {

void check_transform_params(const ViTConfig& cfg, const EncryptionParams& params) {
  if (params.block_size != cfg.patch_size) {
    throw Error(ErrorCode::BlockPatchMismatch,
                "encryption block size " + std::to_string(params.block_size) +
                    " must equal the model patch size " + std::to_string(cfg.patch_size));
  }
  if (params.mode == ShuffleMode::ChannelMixing && !cfg.norm.channel_uniform()) {
    throw Error(ErrorCode::NormalizationMode,
                "channel-mixing shuffle needs identical normalization for every channel; "
                "use --mode per-channel with per-channel statistics");
  }
}

ModelWeights transform_with_schedule(const ModelWeights& model, const ViTConfig& cfg,
                                     const KeySchedule& schedule) {
  validate_weights(model, cfg);
  if (schedule.pixel.size() != cfg.patch_dim() || schedule.block.size() != cfg.num_patches()) {
    throw Error(ErrorCode::Shape, "key schedule does not match the model configuration");
  }
  ModelWeights out = model;

  // Encrypted input component i is plain component pixel[i]; its weight row follows.
  for (std::size_t i = 0; i < cfg.patch_dim(); ++i) {
    const auto src = model.patch_embed_weight.row(schedule.pixel[i]);
    std::copy(src.begin(), src.end(), out.patch_embed_weight.row(i).begin());
  }
  // Encrypted patch j is plain patch block[j]; row 0 (class token) stays put.
  for (std::size_t j = 0; j < cfg.num_patches(); ++j) {
    const auto src = model.pos_embed.row(1 + schedule.block[j]);
    std::copy(src.begin(), src.end(), out.pos_embed.row(1 + j).begin());
  }
  return out;
}

ModelWeights transform_model(const ModelWeights& model, const ViTConfig& cfg,
                             const SecretKey& key, const EncryptionParams& params) {
  cfg.validate();
  check_transform_params(cfg, params);
  return transform_with_schedule(model, cfg,
                                 derive_schedule(key, params, cfg.channels, cfg.num_patches()));
}

namespace {

double log2_factorial(std::size_t n) {
  return std::lgamma(static_cast<double>(n) + 1.0) / std::log(2.0);
}

}  // namespace

double keyspace_bits(std::size_t image_height, std::size_t image_width, std::size_t channels,
                     const EncryptionParams& params) {
  const PatchGrid grid = patch_grid(image_height, image_width, channels, params.block_size);
  const std::size_t area = params.block_size * params.block_size;
  const std::size_t pixel_domain =
      params.mode == ShuffleMode::ChannelMixing ? area * channels : area;
  return log2_factorial(pixel_domain) + log2_factorial(grid.count());
}

double keyspace_bits(const ViTConfig& cfg, const EncryptionParams& params) {
  return keyspace_bits(cfg.image_size, cfg.image_size, cfg.channels, params);
}

}  // namespace cloakvit
