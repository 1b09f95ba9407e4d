#include "cloakvit/image_crypto.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <random>

#include "golden_vectors.hpp"
#include "test_support.hpp"

using namespace cloakvit;
using testing_support::fixture_image;
using testing_support::random_image;
using testing_support::random_key;

namespace {

const EncryptionParams kMixed{16, ShuffleMode::ChannelMixing};
const EncryptionParams kPerChannel{16, ShuffleMode::PerChannel};

std::size_t count_differences(const Image& a, const Image& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) n += a.data[i] != b.data[i];
  return n;
}

std::array<std::size_t, 256> channel_histogram(const Image& img, std::size_t ch) {
  std::array<std::size_t, 256> h{};
  for (std::size_t i = ch; i < img.data.size(); i += img.channels) ++h[img.data[i]];
  return h;
}

}  // namespace

TEST(EncryptVit, PreservesDimensions) {
  const Image img = fixture_image(224, 224, 3);
  const Image enc = encrypt_vit(img, SecretKey{}, kMixed);
  EXPECT_EQ(enc.height, 224u);
  EXPECT_EQ(enc.width, 224u);
  EXPECT_EQ(enc.channels, 3u);
  EXPECT_NE(enc, img);
}

TEST(EncryptVit, IdentityScheduleIsNoOp) {
  const Image img = fixture_image(64, 32, 3);
  const auto id = KeySchedule::identity(768, 8);
  EXPECT_EQ(encrypt_with_schedule(img, id, 16), img);
  EXPECT_EQ(decrypt_with_schedule(img, id, 16), img);
}

TEST(EncryptVit, GoldenRasterMixed) {
  const Image enc = encrypt_vit(fixture_image(32, 32, 3), SecretKey{}, kMixed);
  ASSERT_EQ(enc.data.size(), std::size(golden::kEncrypted32MixedZeroKey));
  EXPECT_TRUE(std::equal(enc.data.begin(), enc.data.end(), std::begin(golden::kEncrypted32MixedZeroKey)));
}

TEST(EncryptVit, GoldenRasterPerChannel) {
  const Image enc = encrypt_vit(fixture_image(32, 32, 3), SecretKey{}, kPerChannel);
  EXPECT_TRUE(std::equal(enc.data.begin(), enc.data.end(),
                         std::begin(golden::kEncrypted32PerChannelZeroKey)));
}

TEST(EncryptVit, ScheduleUsesKeyStreams) {
  const auto s = derive_schedule(SecretKey{}, kMixed, 3, 196);
  EXPECT_EQ(s.pixel, gen_permutation({0}, 768));
  EXPECT_EQ(s.block, gen_permutation({0}, 196));
  const auto pc = derive_schedule(SecretKey{}, kPerChannel, 3, 196);
  EXPECT_EQ(pc.pixel, lift_per_channel(gen_permutation({0}, 256), 3));
}

TEST(EncryptVit, RoundTripProperty) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 30; ++t) {
    const std::size_t m = 1 + rng() % 16;
    const Image img = random_image(m * (1 + rng() % 4), m * (1 + rng() % 4), 3, rng);
    const SecretKey key = random_key(rng);
    const EncryptionParams params{m, (rng() & 1) ? ShuffleMode::PerChannel : ShuffleMode::ChannelMixing};
    EXPECT_EQ(decrypt_vit(encrypt_vit(img, key, params), key, params), img);
  }
}

TEST(EncryptVit, MultisetPreservedMixed) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 10; ++t) {
    const Image img = random_image(32, 64, 3, rng);
    auto a = encrypt_vit(img, random_key(rng), kMixed).data;
    auto b = img.data;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
}

TEST(EncryptVit, PerChannelKeepsChannelHistograms) {
  std::mt19937_64 rng(47);
  const Image img = random_image(48, 32, 3, rng);
  const Image enc = encrypt_vit(img, random_key(rng), kPerChannel);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(channel_histogram(enc, c), channel_histogram(img, c));
}

// Threshold: wrong-key decryptions of smooth fixture images differed in
// over 99% of samples for all 20 key pairs when measured; 1% is the contract.
TEST(DecryptVit, WrongKeyScramblesImage) {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 20; ++t) {
    const Image img = fixture_image(64, 64, 3, t);
    const SecretKey k = random_key(rng);
    SecretKey k2 = random_key(rng);
    const Image wrong = decrypt_vit(encrypt_vit(img, k, kMixed), k2, kMixed);
    EXPECT_GE(count_differences(wrong, img), img.data.size() / 100) << "trial " << t;
  }
}

TEST(EncryptVit, KeySensitivityOnNaturalFixtures) {
  std::mt19937_64 rng(59);
  double total = 0;
  constexpr int kTrials = 10;
  for (int t = 0; t < kTrials; ++t) {
    const Image img = fixture_image(224, 224, 3, t);
    const Image a = encrypt_vit(img, random_key(rng), kMixed);
    const Image b = encrypt_vit(img, random_key(rng), kMixed);
    total += static_cast<double>(count_differences(a, b)) / static_cast<double>(img.data.size());
  }
  EXPECT_GE(total / kTrials, 0.5);
}

TEST(PixelBased, IdentityKeystreamIsNoOp) {
  const Image img = fixture_image(16, 24, 3);
  EXPECT_EQ(encrypt_pixel_based(img, PixelKeystream::identity(16 * 24)), img);
}

TEST(PixelBased, NegativePositiveIsInvolution) {
  const Image img = fixture_image(32, 32, 3);
  const auto ks = PixelKeystream::derive(SecretKey{}, 32 * 32);
  const PixelSchemeSteps neg_only{true, false};
  const Image once = encrypt_pixel_based(img, ks, neg_only);
  EXPECT_NE(once, img);
  EXPECT_EQ(encrypt_pixel_based(once, ks, neg_only), img);
}

TEST(PixelBased, GoldenRaster) {
  const Image enc = encrypt_pixel_based(fixture_image(32, 32, 3), SecretKey{});
  EXPECT_TRUE(std::equal(enc.data.begin(), enc.data.end(), std::begin(golden::kPixelBased32ZeroKey)));
}

TEST(PixelBased, AltersSampleMultiset) {
  const Image img = fixture_image(32, 32, 3);
  auto a = encrypt_pixel_based(img, SecretKey{}).data;
  auto b = img.data;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_NE(a, b);
}

TEST(PixelBased, RejectsNonRgb) {
  EXPECT_THROW(encrypt_pixel_based(Image(4, 4, 1), SecretKey{}), Error);
}

TEST(PixelBased, KeystreamIsDomainSeparatedFromVitStreams) {
  // Changing only bytes 16..23 changes the baseline but not the ViT schedule.
  auto raw = SecretKey{}.bytes();
  raw[16] = 1;
  const SecretKey k(raw);
  const Image img = fixture_image(32, 32, 3);
  EXPECT_EQ(encrypt_vit(img, k, kMixed), encrypt_vit(img, SecretKey{}, kMixed));
  EXPECT_NE(encrypt_pixel_based(img, k), encrypt_pixel_based(img, SecretKey{}));
}

TEST(ShuffleModeText, ParsesBothSpellings) {
  EXPECT_EQ(parse_shuffle_mode("mixed"), ShuffleMode::ChannelMixing);
  EXPECT_EQ(parse_shuffle_mode("per-channel"), ShuffleMode::PerChannel);
  EXPECT_THROW(parse_shuffle_mode("bogus"), Error);
}
