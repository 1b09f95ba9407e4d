#include "cloakvit/tensor.hpp"

#include <cmath>
#include <string>

#include "cloakvit/error.hpp"

namespace cloakvit {

Tensor::Tensor(std::vector<std::size_t> dims)
    : shape(std::move(dims)), data(element_count(shape), 0.0f) {}

std::size_t Tensor::element_count(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::span<float> Tensor::row(std::size_t r) {
  const std::size_t cols = shape.size() > 1 ? data.size() / shape.front() : data.size();
  return std::span<float>(data).subspan(r * cols, cols);
}

std::span<const float> Tensor::row(std::size_t r) const {
  const std::size_t cols = shape.size() > 1 ? data.size() / shape.front() : data.size();
  return std::span<const float>(data).subspan(r * cols, cols);
}

PatchGrid patch_grid(std::size_t height, std::size_t width, std::size_t channels,
                     std::size_t block) {
  if (block == 0) throw Error(ErrorCode::Shape, "block size must be positive");
  if (height == 0 || width == 0 || channels == 0) {
    throw Error(ErrorCode::Shape, "image has an empty dimension");
  }
  if (height % block != 0 || width % block != 0) {
    throw Error(ErrorCode::Shape, "image " + std::to_string(height) + "x" +
                                      std::to_string(width) + " is not divisible by block size " +
                                      std::to_string(block));
  }
  return {height / block, width / block, block * block * channels};
}

namespace {

template <typename Sample, typename Out>
Patches extract_impl(const Sample* src, std::size_t height, std::size_t width,
                     std::size_t channels, std::size_t block) {
  const PatchGrid grid = patch_grid(height, width, channels, block);
  Patches result{Tensor({grid.count(), grid.patch_dim}), grid};
  float* dst = result.patches.data.data();
  const std::size_t row_len = block * channels;
  for (std::size_t by = 0; by < grid.rows; ++by) {
    for (std::size_t bx = 0; bx < grid.cols; ++bx) {
      for (std::size_t r = 0; r < block; ++r) {
        const Sample* line = src + ((by * block + r) * width + bx * block) * channels;
        for (std::size_t k = 0; k < row_len; ++k) *dst++ = static_cast<Out>(line[k]);
      }
    }
  }
  return result;
}

}  // namespace

Patches extract_patches(const Image& img, std::size_t block) {
  if (img.data.size() != img.height * img.width * img.channels) {
    throw Error(ErrorCode::Shape, "image buffer length does not match its dimensions");
  }
  return extract_impl<std::uint8_t, float>(img.data.data(), img.height, img.width, img.channels,
                                           block);
}

Patches extract_patches(const Tensor& hwc, std::size_t block) {
  if (hwc.rank() != 3) throw Error(ErrorCode::Shape, "expected an H x W x C tensor");
  return extract_impl<float, float>(hwc.data.data(), hwc.shape[0], hwc.shape[1], hwc.shape[2],
                                    block);
}

Image assemble_patches(const Tensor& patches, const PatchGrid& grid, std::size_t block,
                       std::size_t channels) {
  if (grid.count() == 0) throw Error(ErrorCode::Shape, "cannot assemble zero patches");
  if (grid.patch_dim != block * block * channels || patches.rank() != 2 ||
      patches.shape[0] != grid.count() || patches.shape[1] != grid.patch_dim) {
    throw Error(ErrorCode::Shape, "patch tensor does not match the patch grid");
  }
  Image img(grid.rows * block, grid.cols * block, channels);
  const float* src = patches.data.data();
  const std::size_t row_len = block * channels;
  for (std::size_t by = 0; by < grid.rows; ++by) {
    for (std::size_t bx = 0; bx < grid.cols; ++bx) {
      for (std::size_t r = 0; r < block; ++r) {
        std::uint8_t* line =
            img.data.data() + ((by * block + r) * img.width + bx * block) * channels;
        for (std::size_t k = 0; k < row_len; ++k) {
          const float v = *src++;
          if (!(v >= 0.0f && v <= 255.0f) || v != std::floor(v)) {
            throw Error(ErrorCode::Shape, "patch value is not an 8-bit sample");
          }
          line[k] = static_cast<std::uint8_t>(v);
        }
      }
    }
  }
  return img;
}

bool NormalizationConfig::channel_uniform() const noexcept {
  for (std::size_t c = 1; c < mean.size(); ++c) {
    if (mean[c] != mean[0]) return false;
  }
  for (std::size_t c = 1; c < std.size(); ++c) {
    if (std[c] != std[0]) return false;
  }
  return true;
}

void NormalizationConfig::validate(std::size_t channels) const {
  if (mean.size() != channels || std.size() != channels) {
    throw Error(ErrorCode::Config, "normalization needs one mean and std per channel (" +
                                       std::to_string(channels) + ")");
  }
  for (std::size_t c = 0; c < channels; ++c) {
    if (!std::isfinite(mean[c]) || !std::isfinite(std[c])) {
      throw Error(ErrorCode::Config, "normalization statistics must be finite");
    }
    if (!(std[c] > 0.0)) {
      throw Error(ErrorCode::Config, "normalization std must be positive (channel " +
                                         std::to_string(c) + ")");
    }
  }
}

Tensor normalize(const Image& img, const NormalizationConfig& cfg) {
  cfg.validate(img.channels);
  Tensor out({img.height, img.width, img.channels});
  // 256-entry lookup per channel; the affine map is evaluated in double.
  std::vector<float> table(256 * img.channels);
  for (std::size_t c = 0; c < img.channels; ++c) {
    for (std::size_t s = 0; s < 256; ++s) {
      table[c * 256 + s] =
          static_cast<float>((static_cast<double>(s) / 255.0 - cfg.mean[c]) / cfg.std[c]);
    }
  }
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = table[(i % img.channels) * 256 + img.data[i]];
  }
  return out;
}

}  // namespace cloakvit
