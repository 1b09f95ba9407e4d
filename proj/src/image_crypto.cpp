#include "cloakvit/image_crypto.hpp"

#include <string>

#include "cloakvit/error.hpp"

namespace cloakvit {

std::string_view to_string(ShuffleMode mode) {
  return mode == ShuffleMode::ChannelMixing ? "mixed" : "per-channel";
}

ShuffleMode parse_shuffle_mode(std::string_view text) {
  if (text == "mixed" || text == "channel-mixing") return ShuffleMode::ChannelMixing;
  if (text == "per-channel") return ShuffleMode::PerChannel;
  throw Error(ErrorCode::Config,
              "unknown shuffle mode '" + std::string(text) + "' (expected mixed|per-channel)");
}

KeySchedule KeySchedule::identity(std::size_t patch_dim, std::size_t num_patches) {
  return {Permutation::identity(patch_dim), Permutation::identity(num_patches)};
}

KeySchedule KeySchedule::inverse() const { return {invert(pixel), invert(block)}; }

Permutation lift_per_channel(const Permutation& spatial, std::size_t channels) {
  std::vector<std::uint32_t> map(spatial.size() * channels);
  for (std::size_t d = 0; d < map.size(); ++d) {
    map[d] = static_cast<std::uint32_t>(spatial[d / channels] * channels + d % channels);
  }
  return Permutation(std::move(map));
}

KeySchedule derive_schedule(const SecretKey& key, const EncryptionParams& params,
                            std::size_t channels, std::size_t num_patches) {
  if (params.block_size == 0) throw Error(ErrorCode::Config, "block size must be positive");
  const SeedPair seeds = derive_seeds(key);
  const std::size_t area = params.block_size * params.block_size;
  Permutation pixel = params.mode == ShuffleMode::ChannelMixing
                          ? gen_permutation(seeds.pixel, area * channels)
                          : lift_per_channel(gen_permutation(seeds.pixel, area), channels);
  return {std::move(pixel), gen_permutation(seeds.block, num_patches)};
}

namespace {

void check_schedule(const KeySchedule& s, const PatchGrid& grid) {
  if (s.pixel.size() != grid.patch_dim || s.block.size() != grid.count()) {
    throw Error(ErrorCode::Shape, "key schedule does not match the image patch grid");
  }
}

// out patch i, sample d = in patch block[i], sample pixel[d]
std::vector<std::uint8_t> gather_blocks(const Image& img, const PatchGrid& grid,
                                        std::size_t block, const Permutation& block_perm,
                                        const Permutation& pixel_perm) {
  const std::size_t c = img.channels;
  const std::size_t row_len = block * c;
  auto offset = [&](std::size_t patch, std::size_t d) {
    const std::size_t by = patch / grid.cols;
    const std::size_t bx = patch % grid.cols;
    const std::size_t r = d / row_len;
    const std::size_t k = d % row_len;
    return ((by * block + r) * img.width + bx * block) * c + k;
  };
  std::vector<std::uint8_t> out(img.data.size());
  for (std::size_t i = 0; i < grid.count(); ++i) {
    const std::size_t src_patch = block_perm[i];
    for (std::size_t d = 0; d < grid.patch_dim; ++d) {
      out[offset(i, d)] = img.data[offset(src_patch, pixel_perm[d])];
    }
  }
  return out;
}

}  // namespace

Image encrypt_with_schedule(const Image& img, const KeySchedule& schedule, std::size_t block) {
  const PatchGrid grid = patch_grid(img.height, img.width, img.channels, block);
  check_schedule(schedule, grid);
  Image out = img;
  out.data = gather_blocks(img, grid, block, schedule.block, schedule.pixel);
  return out;
}

Image decrypt_with_schedule(const Image& img, const KeySchedule& schedule, std::size_t block) {
  const PatchGrid grid = patch_grid(img.height, img.width, img.channels, block);
  check_schedule(schedule, grid);
  // enc[i][d] = x[b[i]][p[d]]  =>  x[j][e] = enc[b^-1[j]][p^-1[e]]
  Image out = img;
  out.data = gather_blocks(img, grid, block, invert(schedule.block), invert(schedule.pixel));
  return out;
}

Image encrypt_vit(const Image& img, const SecretKey& key, const EncryptionParams& params) {
  const PatchGrid grid = patch_grid(img.height, img.width, img.channels, params.block_size);
  return encrypt_with_schedule(img, derive_schedule(key, params, img.channels, grid.count()),
                               params.block_size);
}

Image decrypt_vit(const Image& img, const SecretKey& key, const EncryptionParams& params) {
  const PatchGrid grid = patch_grid(img.height, img.width, img.channels, params.block_size);
  return decrypt_with_schedule(img, derive_schedule(key, params, img.channels, grid.count()),
                               params.block_size);
}

PixelKeystream PixelKeystream::derive(const SecretKey& key, std::size_t pixels) {
  PixelKeystream ks;
  ks.flip_mask.resize(pixels);
  ks.channel_order.resize(pixels);
  SplitMix64 rng(read_seed(key, 16).value);
  for (std::size_t i = 0; i < pixels; ++i) {
    const std::uint64_t r = rng.next();
    ks.flip_mask[i] = static_cast<std::uint8_t>(r & 7);
    ks.channel_order[i] = static_cast<std::uint8_t>((r >> 8) % 6);
  }
  return ks;
}

PixelKeystream PixelKeystream::identity(std::size_t pixels) {
  PixelKeystream ks;
  ks.flip_mask.assign(pixels, 0);
  ks.channel_order.assign(pixels, 0);
  return ks;
}

Image encrypt_pixel_based(const Image& img, const SecretKey& key) {
  return encrypt_pixel_based(img, PixelKeystream::derive(key, img.height * img.width));
}

Image encrypt_pixel_based(const Image& img, const PixelKeystream& stream, PixelSchemeSteps steps) {
  if (img.channels != 3) {
    throw Error(ErrorCode::Shape, "pixel-based encryption needs an RGB image");
  }
  const std::size_t pixels = img.height * img.width;
  if (stream.flip_mask.size() != pixels || stream.channel_order.size() != pixels) {
    throw Error(ErrorCode::Shape, "pixel keystream length does not match the image");
  }
  Image out = img;
  for (std::size_t p = 0; p < pixels; ++p) {
    std::uint8_t px[3];
    for (std::size_t c = 0; c < 3; ++c) {
      const std::uint8_t s = img.data[p * 3 + c];
      const bool flip = steps.negative_positive && ((stream.flip_mask[p] >> c) & 1);
      px[c] = flip ? static_cast<std::uint8_t>(255 - s) : s;
    }
    const auto& order = kChannelOrders[steps.channel_shuffle ? stream.channel_order[p] : 0];
    for (std::size_t c = 0; c < 3; ++c) out.data[p * 3 + c] = px[order[c]];
  }
  return out;
}

}  // namespace cloakvit
