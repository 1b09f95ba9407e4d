#include "cloakvit/weights_io.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "cloakvit/error.hpp"
#include "cloakvit/file_util.hpp"
#include "test_support.hpp"

using namespace cloakvit;
using testing_support::TempDir;

namespace {

ErrorCode load_error(const std::vector<std::uint8_t>& bytes) {
  try {
    deserialize_weights(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "deserialize_weights accepted a bad file";
  return ErrorCode::Io;
}

std::string load_message(const std::vector<std::uint8_t>& bytes) {
  try {
    deserialize_weights(bytes);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// Rewrites the JSON header while keeping the preamble consistent.
std::vector<std::uint8_t> with_header(const std::vector<std::uint8_t>& file,
                                      const std::string& old_text, const std::string& new_text) {
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(file[8 + i]) << (8 * i);
  std::string header(file.begin() + 16, file.begin() + 16 + static_cast<long>(len));
  const auto pos = header.find(old_text);
  EXPECT_NE(pos, std::string::npos);
  header.replace(pos, old_text.size(), new_text);
  std::vector<std::uint8_t> out(file.begin(), file.begin() + 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(header.size() >> (8 * i)));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), file.begin() + 16 + static_cast<long>(len), file.end());
  return out;
}

}  // namespace

TEST(Weights, SaveLoadRoundTripIsBitExact) {
  TempDir dir;
  auto cfg = ViTConfig::toy();
  cfg.norm.mean = {0.485, 0.456, 0.406};
  cfg.norm.std = {0.229, 0.224, 0.225};
  const auto model = random_init(cfg, 77);
  save_weights(model, cfg, dir / "m.vtw");
  const auto loaded = load_weights(dir / "m.vtw");
  EXPECT_EQ(loaded.config, cfg);
  EXPECT_EQ(loaded.weights, model);
  EXPECT_EQ(element_count(loaded.weights), param_count(cfg));
}

TEST(Weights, LayoutIsLittleEndianAfterPreamble) {
  const auto cfg = ViTConfig::toy();
  auto model = zero_weights(cfg);
  model.patch_embed_weight.data[0] = 1.0f;
  const auto bytes = serialize_weights(model, cfg);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "VTW1");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(bytes[8 + i]) << (8 * i);
  const std::size_t payload = 16 + len;
  EXPECT_EQ(bytes.size(), payload + 4 * param_count(cfg));
  // 1.0f == 0x3F800000
  EXPECT_EQ(bytes[payload + 0], 0x00);
  EXPECT_EQ(bytes[payload + 2], 0x80);
  EXPECT_EQ(bytes[payload + 3], 0x3F);
}

TEST(Weights, TruncatedFileIsPayloadLengthError) {
  const auto cfg = ViTConfig::toy();
  auto bytes = serialize_weights(random_init(cfg, 1), cfg);
  bytes.resize(bytes.size() - 10);
  EXPECT_EQ(load_error(bytes), ErrorCode::PayloadLength);
  bytes.resize(bytes.size() + 20, 0);
  EXPECT_EQ(load_error(bytes), ErrorCode::PayloadLength);
}

TEST(Weights, BadMagic) {
  const auto cfg = ViTConfig::toy();
  auto bytes = serialize_weights(zero_weights(cfg), cfg);
  bytes[3] = '2';
  EXPECT_EQ(load_error(bytes), ErrorCode::BadMagic);
  EXPECT_EQ(load_error({'V', 'T'}), ErrorCode::BadMagic);
}

TEST(Weights, VersionMismatch) {
  const auto cfg = ViTConfig::toy();
  auto bytes = serialize_weights(zero_weights(cfg), cfg);
  bytes[4] = 2;
  EXPECT_EQ(load_error(bytes), ErrorCode::VersionMismatch);
}

TEST(Weights, PatchEmbedRowsMismatchNamesTensor) {
  const auto cfg = ViTConfig::toy();
  const auto bytes = serialize_weights(zero_weights(cfg), cfg);
  const auto bad = with_header(bytes, R"({"name":"patch_embed.weight","shape":[768,64]})",
                               R"({"name":"patch_embed.weight","shape":[256,64]})");
  EXPECT_EQ(load_error(bad), ErrorCode::ShapeTable);
  EXPECT_NE(load_message(bad).find("patch_embed.weight"), std::string::npos);
}

TEST(Weights, NonFiniteValueRejected) {
  const auto cfg = ViTConfig::toy();
  auto bytes = serialize_weights(zero_weights(cfg), cfg);
  const auto nan_bits = std::bit_cast<std::uint32_t>(std::numeric_limits<float>::quiet_NaN());
  for (int i = 0; i < 4; ++i) bytes[bytes.size() - 4 + i] = static_cast<std::uint8_t>(nan_bits >> (8 * i));
  EXPECT_EQ(load_error(bytes), ErrorCode::NonFinite);
}

TEST(Weights, MalformedHeaderJson) {
  const auto cfg = ViTConfig::toy();
  const auto bytes = serialize_weights(zero_weights(cfg), cfg);
  EXPECT_EQ(load_error(with_header(bytes, "{\"config\"", "[\"config\"")), ErrorCode::Format);
}

TEST(Weights, HeaderOnlyRead) {
  TempDir dir;
  const auto cfg = ViTConfig::vit_s16(4);
  auto model = zero_weights(cfg);
  save_weights(model, cfg, dir / "s16.vtw");
  const auto h = read_weights_header(dir / "s16.vtw");
  EXPECT_EQ(h.config, cfg);
  EXPECT_EQ(h.tensors.size(), tensor_table(cfg).size());
  EXPECT_EQ(std::filesystem::file_size(dir / "s16.vtw"), h.payload_offset + 4 * param_count(cfg));
}

TEST(Weights, FailedSaveLeavesNoFile) {
  TempDir dir;
  const auto cfg = ViTConfig::toy();
  auto model = zero_weights(cfg);
  model.head_bias.data[0] = INFINITY;
  EXPECT_THROW(save_weights(model, cfg, dir / "x.vtw"), Error);
  EXPECT_TRUE(std::filesystem::is_empty(dir.path()));
}
