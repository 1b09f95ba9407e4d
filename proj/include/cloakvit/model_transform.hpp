#pragma once

#include "cloakvit/image_crypto.hpp"
#include "cloakvit/vit.hpp"

namespace cloakvit {

/// Builds M' such that forward(M', encrypt_vit(x, key, params)) matches
/// forward(M, x). Only patch_embed_weight rows and pos_embed rows 1..N move.
ModelWeights transform_model(const ModelWeights& model, const ViTConfig& cfg,
                             const SecretKey& key, const EncryptionParams& params);

/// Applies an explicit schedule; transform_with_schedule(M', s.inverse())
/// recovers M.
ModelWeights transform_with_schedule(const ModelWeights& model, const ViTConfig& cfg,
                                     const KeySchedule& schedule);

/// Rejects params that cannot give an equivalent model for `cfg`.
void check_transform_params(const ViTConfig& cfg, const EncryptionParams& params);

/// log2(D!) + log2(N!), D the pixel permutation length, N the patch count.
double keyspace_bits(const ViTConfig& cfg, const EncryptionParams& params);

/// Same quantity without a full model config.
double keyspace_bits(std::size_t image_height, std::size_t image_width, std::size_t channels,
                     const EncryptionParams& params);

}  // namespace cloakvit
