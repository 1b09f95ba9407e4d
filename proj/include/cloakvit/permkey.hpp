#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cloakvit/error.hpp"

namespace cloakvit {

/// 32 raw key octets. Bytes 0..7 seed the pixel-shuffle stream, 8..15 the
/// block-scramble stream, 16..23 the pixel-based baseline keystream.
class SecretKey {
 public:
  static constexpr std::size_t kSize = 32;

  SecretKey() = default;
  explicit SecretKey(const std::array<std::uint8_t, kSize>& bytes) : bytes_(bytes) {}

  /// Throws ErrorCode::KeyFormat unless `bytes` has exactly 32 elements.
  static SecretKey from_bytes(std::span<const std::uint8_t> bytes);
  /// Accepts 64 hex digits (either case), surrounding whitespace ignored.
  static SecretKey from_hex(std::string_view hex);

  std::string to_hex() const;
  const std::array<std::uint8_t, kSize>& bytes() const noexcept { return bytes_; }

  friend bool operator==(const SecretKey&, const SecretKey&) = default;

 private:
  std::array<std::uint8_t, kSize> bytes_{};
};

struct StreamSeed {
  std::uint64_t value = 0;
  friend bool operator==(const StreamSeed&, const StreamSeed&) = default;
};

struct SeedPair {
  StreamSeed pixel;
  StreamSeed block;
};

SeedPair derive_seeds(const SecretKey& key);

/// Little-endian read of key bytes [offset, offset + 8).
StreamSeed read_seed(const SecretKey& key, std::size_t offset);

struct SplitMixStep {
  std::uint64_t next_state;
  std::uint64_t output;
};

inline constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

constexpr SplitMixStep splitmix64_next(std::uint64_t state) noexcept {
  const std::uint64_t next = state + kSplitMixGamma;
  std::uint64_t z = next;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return {next, z ^ (z >> 31)};
}

/// Stateful convenience wrapper around splitmix64_next.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() noexcept {
    const auto step = splitmix64_next(state_);
    state_ = step.next_state;
    return step.output;
  }

  /// Unbiased draw in [0, bound) by rejection; bound must be >= 1.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept;

  /// Uniform double in [0, 1) from the top 53 bits of one draw.
  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Gather table: apply() produces out[i] = in[map[i]].
class Permutation {
 public:
  Permutation() = default;

  /// Validates bijectivity; throws ErrorCode::EmptyDomain or LengthMismatch.
  explicit Permutation(std::vector<std::uint32_t> map);

  static Permutation identity(std::size_t n);

  std::size_t size() const noexcept { return map_.size(); }
  std::uint32_t operator[](std::size_t i) const { return map_[i]; }
  const std::vector<std::uint32_t>& map() const noexcept { return map_; }
  bool is_identity() const noexcept;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::uint32_t> map_;
};

/// Fisher-Yates shuffle of the identity driven by SplitMix64 from `seed`.
Permutation gen_permutation(StreamSeed seed, std::size_t n);

Permutation invert(const Permutation& p);

/// compose(a, b) applies b first, then a: apply(compose(a,b), xs) == apply(a, apply(b, xs)).
Permutation compose(const Permutation& a, const Permutation& b);

template <typename T>
std::vector<T> apply(const Permutation& p, std::span<const T> xs) {
  if (xs.size() != p.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "permutation of size " + std::to_string(p.size()) +
                    " applied to sequence of length " + std::to_string(xs.size()));
  }
  std::vector<T> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out.push_back(xs[p[i]]);
  return out;
}

template <typename T>
std::vector<T> apply(const Permutation& p, const std::vector<T>& xs) {
  return apply(p, std::span<const T>(xs));
}

}  // namespace cloakvit
