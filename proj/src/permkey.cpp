#include "cloakvit/permkey.hpp"

#include <utility>

namespace cloakvit {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

}  // namespace

SecretKey SecretKey::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kSize) {
    throw Error(ErrorCode::KeyFormat,
                "secret key must be 32 bytes, got " + std::to_string(bytes.size()));
  }
  std::array<std::uint8_t, kSize> raw{};
  std::copy(bytes.begin(), bytes.end(), raw.begin());
  return SecretKey(raw);
}

SecretKey SecretKey::from_hex(std::string_view hex) {
  while (!hex.empty() && is_space(hex.front())) hex.remove_prefix(1);
  while (!hex.empty() && is_space(hex.back())) hex.remove_suffix(1);
  if (hex.size() != 2 * kSize) {
    throw Error(ErrorCode::KeyFormat, "secret key must be 64 hex characters, got " +
                                          std::to_string(hex.size()));
  }
  std::array<std::uint8_t, kSize> raw{};
  for (std::size_t i = 0; i < kSize; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::KeyFormat,
                  "invalid hex digit in secret key at position " + std::to_string(2 * i));
    }
    raw[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return SecretKey(raw);
}

std::string SecretKey::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * kSize);
  for (auto b : bytes_) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

StreamSeed read_seed(const SecretKey& key, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(key.bytes()[offset + i]) << (8 * i);
  }
  return {v};
}

SeedPair derive_seeds(const SecretKey& key) { return {read_seed(key, 0), read_seed(key, 8)}; }

std::uint64_t SplitMix64::uniform_below(std::uint64_t bound) noexcept {
  // 2^64 mod bound, computed without 128-bit arithmetic.
  const std::uint64_t rem = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (rem == 0 || r < 0 - rem) return r % bound;
  }
}

Permutation::Permutation(std::vector<std::uint32_t> map) : map_(std::move(map)) {
  if (map_.empty()) throw Error(ErrorCode::EmptyDomain, "permutation over an empty domain");
  std::vector<bool> seen(map_.size(), false);
  for (auto v : map_) {
    if (v >= map_.size() || seen[v]) {
      throw Error(ErrorCode::LengthMismatch, "permutation map is not a bijection");
    }
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::EmptyDomain, "permutation over an empty domain");
  Permutation p;
  p.map_.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.map_[i] = static_cast<std::uint32_t>(i);
  return p;
}

bool Permutation::is_identity() const noexcept {
  for (std::size_t i = 0; i < map_.size(); ++i) {
    if (map_[i] != i) return false;
  }
  return true;
}

Permutation gen_permutation(StreamSeed seed, std::size_t n) {
  Permutation p = Permutation::identity(n);
  std::vector<std::uint32_t> map = p.map();
  SplitMix64 rng(seed.value);
  for (std::size_t i = n - 1; i >= 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i + 1));
    std::swap(map[i], map[j]);
  }
  return Permutation(std::move(map));
}

Permutation invert(const Permutation& p) {
  std::vector<std::uint32_t> inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = static_cast<std::uint32_t>(i);
  return Permutation(std::move(inv));
}

Permutation compose(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch, "composing permutations of different sizes");
  }
  // apply(a, apply(b, xs))[i] = apply(b, xs)[a[i]] = xs[b[a[i]]]
  std::vector<std::uint32_t> map(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) map[i] = b[a[i]];
  return Permutation(std::move(map));
}

}  // namespace cloakvit
