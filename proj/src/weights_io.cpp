#include "cloakvit/weights_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cloakvit/error.hpp"
#include "cloakvit/file_util.hpp"

namespace cloakvit {

using json = nlohmann::json;

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

json config_to_json(const ViTConfig& cfg) {
  return json{{"image_size", cfg.image_size},
              {"patch_size", cfg.patch_size},
              {"channels", cfg.channels},
              {"embed_dim", cfg.embed_dim},
              {"depth", cfg.depth},
              {"heads", cfg.heads},
              {"mlp_ratio", cfg.mlp_ratio},
              {"num_classes", cfg.num_classes},
              {"norm", {{"mean", cfg.norm.mean}, {"std", cfg.norm.std}}}};
}

ViTConfig config_from_json(const json& j) {
  ViTConfig cfg;
  try {
    cfg.image_size = j.at("image_size").get<std::size_t>();
    cfg.patch_size = j.at("patch_size").get<std::size_t>();
    cfg.channels = j.at("channels").get<std::size_t>();
    cfg.embed_dim = j.at("embed_dim").get<std::size_t>();
    cfg.depth = j.at("depth").get<std::size_t>();
    cfg.heads = j.at("heads").get<std::size_t>();
    cfg.mlp_ratio = j.at("mlp_ratio").get<double>();
    cfg.num_classes = j.at("num_classes").get<std::size_t>();
    cfg.norm.mean = j.at("norm").at("mean").get<std::vector<double>>();
    cfg.norm.std = j.at("norm").at("std").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("weights header config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

constexpr std::size_t kPreambleSize = 4 + 4 + 8;

WeightsHeader parse_header(const std::uint8_t* data, std::size_t size) {
  if (size < 4 || std::memcmp(data, kWeightsMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "not a .vtw weights file (bad magic)");
  }
  if (size < kPreambleSize) throw Error(ErrorCode::Format, "truncated .vtw preamble");
  WeightsHeader header;
  header.version = get_u32(data + 4);
  if (header.version != kWeightsVersion) {
    throw Error(ErrorCode::VersionMismatch,
                "unsupported .vtw format version " + std::to_string(header.version) +
                    " (expected " + std::to_string(kWeightsVersion) + ")");
  }
  const std::uint64_t header_len = get_u64(data + 8);
  if (header_len > size - kPreambleSize) {
    throw Error(ErrorCode::Format, "truncated .vtw header");
  }
  json j;
  try {
    j = json::parse(data + kPreambleSize, data + kPreambleSize + header_len);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("malformed .vtw header JSON: ") + e.what());
  }
  if (!j.contains("config")) throw Error(ErrorCode::Config, "weights header has no config");
  header.config = config_from_json(j["config"]);
  try {
    for (const auto& t : j.at("tensors")) {
      header.tensors.push_back(
          {t.at("name").get<std::string>(), t.at("shape").get<std::vector<std::size_t>>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ShapeTable, std::string("malformed tensor table: ") + e.what());
  }

  const auto expected = tensor_table(header.config);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= header.tensors.size()) {
      throw Error(ErrorCode::ShapeTable, "tensor table is missing '" + expected[i].name + "'");
    }
    const auto& got = header.tensors[i];
    if (got.name != expected[i].name) {
      throw Error(ErrorCode::ShapeTable, "tensor table entry " + std::to_string(i) + " is '" +
                                             got.name + "', expected '" + expected[i].name + "'");
    }
    if (got.shape != expected[i].shape) {
      std::string want, have;
      for (auto d : expected[i].shape) want += (want.empty() ? "" : "x") + std::to_string(d);
      for (auto d : got.shape) have += (have.empty() ? "" : "x") + std::to_string(d);
      throw Error(ErrorCode::ShapeTable, "tensor '" + got.name + "' has shape " + have +
                                             ", config requires " + want);
    }
  }
  if (header.tensors.size() != expected.size()) {
    throw Error(ErrorCode::ShapeTable, "tensor table has " +
                                           std::to_string(header.tensors.size()) +
                                           " entries, expected " + std::to_string(expected.size()));
  }
  header.payload_offset = kPreambleSize + header_len;
  return header;
}

}  // namespace

std::vector<std::uint8_t> serialize_weights(const ModelWeights& model, const ViTConfig& cfg) {
  cfg.validate();
  validate_weights(model, cfg);
  json tensors = json::array();
  for (const auto& spec : tensor_table(cfg)) {
    tensors.push_back({{"name", spec.name}, {"shape", spec.shape}});
  }
  const std::string header = json{{"config", config_to_json(cfg)}, {"tensors", tensors}}.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kPreambleSize + header.size() + 4 * element_count(model));
  out.insert(out.end(), kWeightsMagic, kWeightsMagic + 4);
  put_u32(out, kWeightsVersion);
  put_u64(out, header.size());
  out.insert(out.end(), header.begin(), header.end());
  for_each_tensor(model, [&](const std::string&, const Tensor& t) {
    for (float v : t.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  });
  return out;
}

LoadedModel deserialize_weights(const std::vector<std::uint8_t>& bytes) {
  const WeightsHeader header = parse_header(bytes.data(), bytes.size());
  std::uint64_t expected_floats = 0;
  for (const auto& t : header.tensors) expected_floats += Tensor::element_count(t.shape);
  const std::uint64_t payload = bytes.size() - header.payload_offset;
  if (payload != 4 * expected_floats) {
    throw Error(ErrorCode::PayloadLength,
                "payload is " + std::to_string(payload) + " bytes, tensor table requires " +
                    std::to_string(4 * expected_floats));
  }

  LoadedModel loaded{header.config, zero_weights(header.config)};
  const std::uint8_t* p = bytes.data() + header.payload_offset;
  for_each_tensor(loaded.weights, [&](const std::string& name, Tensor& t) {
    for (auto& v : t.data) {
      v = std::bit_cast<float>(get_u32(p));
      p += 4;
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFinite, "tensor '" + name + "' contains a non-finite value");
      }
    }
  });
  return loaded;
}

void save_weights(const ModelWeights& model, const ViTConfig& cfg,
                  const std::filesystem::path& path) {
  write_file_atomic(path, serialize_weights(model, cfg));
}

LoadedModel load_weights(const std::filesystem::path& path) {
  return deserialize_weights(read_file_bytes(path));
}

WeightsHeader read_weights_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> pre(kPreambleSize);
  in.read(reinterpret_cast<char*>(pre.data()), kPreambleSize);
  pre.resize(static_cast<std::size_t>(in.gcount()));
  if (pre.size() < 4 || std::memcmp(pre.data(), kWeightsMagic, 4) != 0 ||
      pre.size() < kPreambleSize) {
    return parse_header(pre.data(), pre.size());  // raises the matching error
  }
  const std::uint64_t header_len = get_u64(pre.data() + 8);
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  if (header_len > file_size - kPreambleSize) {
    throw Error(ErrorCode::Format, "truncated .vtw header");
  }
  std::vector<std::uint8_t> head(kPreambleSize + header_len);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  return parse_header(head.data(), head.size());
}

}  // namespace cloakvit
