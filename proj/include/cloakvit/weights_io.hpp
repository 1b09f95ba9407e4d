#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cloakvit/vit.hpp"

// .vtw container:
//   "VTW1" | u32 LE format version | u64 LE header length | UTF-8 JSON header
//   | float32 LE payloads concatenated in tensor-table order.
// The JSON header holds {"config": {...}, "tensors": [{"name", "shape"}...]}.

namespace cloakvit {

inline constexpr char kWeightsMagic[4] = {'V', 'T', 'W', '1'};
inline constexpr std::uint32_t kWeightsVersion = 1;

struct LoadedModel {
  ViTConfig config;
  ModelWeights weights;
};

struct WeightsHeader {
  std::uint32_t version = 0;
  ViTConfig config;
  std::vector<TensorSpec> tensors;
  std::uint64_t payload_offset = 0;
};

std::vector<std::uint8_t> serialize_weights(const ModelWeights& model, const ViTConfig& cfg);
LoadedModel deserialize_weights(const std::vector<std::uint8_t>& bytes);

void save_weights(const ModelWeights& model, const ViTConfig& cfg,
                  const std::filesystem::path& path);
LoadedModel load_weights(const std::filesystem::path& path);

/// Parses and validates the header only.
WeightsHeader read_weights_header(const std::filesystem::path& path);

}  // namespace cloakvit
