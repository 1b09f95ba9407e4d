#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cloakvit {

/// 8-bit raster, row-major height x width x channel with channel fastest.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(std::size_t h, std::size_t w, std::size_t c)
      : height(h), width(w), channels(c), data(h * w * c, 0) {}

  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t ch) {
    return data[(y * width + x) * channels + ch];
  }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t ch) const {
    return data[(y * width + x) * channels + ch];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Row-major float32 tensor.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);

  static std::size_t element_count(const std::vector<std::size_t>& dims);
  std::size_t size() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return shape.size(); }

  std::span<float> row(std::size_t r);
  std::span<const float> row(std::size_t r) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct PatchGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t patch_dim = 0;

  std::size_t count() const noexcept { return rows * cols; }
  friend bool operator==(const PatchGrid&, const PatchGrid&) = default;
};

/// Patches are flattened (row, col, channel) with channel fastest, which is
/// also the row order of the patch-embedding weight. Flat index of sample
/// (r, c, ch) inside an MxM patch with C channels.
constexpr std::size_t patch_flat_index(std::size_t r, std::size_t c, std::size_t ch,
                                       std::size_t block, std::size_t channels) {
  return (r * block + c) * channels + ch;
}

struct Patches {
  Tensor patches;  // N x D
  PatchGrid grid;
};

/// Throws ErrorCode::Shape when height or width is not a multiple of `block`.
PatchGrid patch_grid(std::size_t height, std::size_t width, std::size_t channels,
                     std::size_t block);

/// Sample values are copied verbatim (0..255).
Patches extract_patches(const Image& img, std::size_t block);

/// Same flattening applied to an H x W x C float tensor (e.g. a normalized image).
Patches extract_patches(const Tensor& hwc, std::size_t block);

/// Inverse of extract_patches(Image). Values must be integral in [0, 255].
Image assemble_patches(const Tensor& patches, const PatchGrid& grid, std::size_t block,
                       std::size_t channels);

struct NormalizationConfig {
  std::vector<double> mean{0.5, 0.5, 0.5};
  std::vector<double> std{0.5, 0.5, 0.5};

  /// All means equal and all stds equal.
  bool channel_uniform() const noexcept;
  /// Throws ErrorCode::Config on empty/mismatched vectors or non-positive std.
  void validate(std::size_t channels) const;

  friend bool operator==(const NormalizationConfig&, const NormalizationConfig&) = default;
};

/// (sample / 255 - mean[c]) / std[c] as float32, H x W x C layout.
Tensor normalize(const Image& img, const NormalizationConfig& cfg);

}  // namespace cloakvit
