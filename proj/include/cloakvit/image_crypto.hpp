#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cloakvit/permkey.hpp"
#include "cloakvit/tensor.hpp"

namespace cloakvit {

enum class ShuffleMode {
  ChannelMixing,  // one permutation over all M*M*C samples of a block
  PerChannel,     // one M*M permutation applied identically to every channel
};

std::string_view to_string(ShuffleMode mode);
/// Accepts "mixed" / "per-channel"; throws ErrorCode::Config otherwise.
ShuffleMode parse_shuffle_mode(std::string_view text);

struct EncryptionParams {
  std::size_t block_size = 16;
  ShuffleMode mode = ShuffleMode::ChannelMixing;
};

/// The two gather permutations shared by image encryption and model
/// transformation. `pixel` always acts on the full M*M*C patch vector; in
/// per-channel mode it is the M*M permutation lifted to every channel.
struct KeySchedule {
  Permutation pixel;
  Permutation block;

  static KeySchedule identity(std::size_t patch_dim, std::size_t num_patches);
  KeySchedule inverse() const;
};

/// Single source of truth for (seed, n) pairs: encrypt_vit and transform_model
/// both derive their permutations here.
KeySchedule derive_schedule(const SecretKey& key, const EncryptionParams& params,
                            std::size_t channels, std::size_t num_patches);

/// Lift an M*M sample permutation to the channel-fastest M*M*C flattening.
Permutation lift_per_channel(const Permutation& spatial, std::size_t channels);

Image encrypt_vit(const Image& img, const SecretKey& key, const EncryptionParams& params);
Image decrypt_vit(const Image& img, const SecretKey& key, const EncryptionParams& params);

/// Schedule-level entry points; also the identity-permutation test hook.
Image encrypt_with_schedule(const Image& img, const KeySchedule& schedule, std::size_t block);
Image decrypt_with_schedule(const Image& img, const KeySchedule& schedule, std::size_t block);

// Pixel-based baseline: per pixel position, a keyed negative-positive flip per
// channel followed by one of the six RGB channel orders.

inline constexpr std::uint8_t kChannelOrders[6][3] = {
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

struct PixelKeystream {
  std::vector<std::uint8_t> flip_mask;      // bit c set => channel c inverted
  std::vector<std::uint8_t> channel_order;  // index into kChannelOrders

  /// One SplitMix64 draw per pixel position, seeded from key bytes 16..23:
  /// flip_mask = r & 7, channel_order = (r >> 8) % 6.
  static PixelKeystream derive(const SecretKey& key, std::size_t pixels);
  static PixelKeystream identity(std::size_t pixels);
};

struct PixelSchemeSteps {
  bool negative_positive = true;
  bool channel_shuffle = true;
};

Image encrypt_pixel_based(const Image& img, const SecretKey& key);
Image encrypt_pixel_based(const Image& img, const PixelKeystream& stream,
                          PixelSchemeSteps steps = {});

}  // namespace cloakvit
