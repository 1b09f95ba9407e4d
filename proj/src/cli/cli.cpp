#include "cloakvit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cloakvit/dataset.hpp"
#include "cloakvit/error.hpp"
#include "cloakvit/file_util.hpp"
#include "cloakvit/image_crypto.hpp"
#include "cloakvit/image_io.hpp"
#include "cloakvit/model_transform.hpp"
#include "cloakvit/permkey.hpp"
#include "cloakvit/vit.hpp"
#include "cloakvit/weights_io.hpp"

namespace cloakvit::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kJsonSchema = 1;
constexpr double kEquivalenceTolerance = 1e-5;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic:
    case ErrorCode::VersionMismatch:
    case ErrorCode::ShapeTable:
    case ErrorCode::PayloadLength:
    case ErrorCode::NonFinite:
    case ErrorCode::Format:
    case ErrorCode::Io:
      return kIoFormat;
    default:
      return kUsage;
  }
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SecretKey resolve_key(const std::string& key_path) {
  if (!key_path.empty()) return SecretKey::from_hex(read_file_text(key_path));
  if (const char* env = std::getenv("CLOAKVIT_KEY"); env != nullptr && *env != '\0') {
    return SecretKey::from_hex(env);
  }
  throw UsageError("no key given: pass --key FILE or set CLOAKVIT_KEY");
}

std::vector<std::string> read_labels(const std::string& path) {
  std::vector<std::string> labels;
  std::istringstream in(read_file_text(path));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    labels.push_back(line);
  }
  return labels;
}

std::string format_logits(const std::vector<float>& logits) {
  std::ostringstream s;
  s << std::setprecision(9);
  for (std::size_t i = 0; i < logits.size(); ++i) s << (i ? " " : "") << logits[i];
  return s.str();
}

Image random_image(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed) {
  Image img(h, w, c);
  SplitMix64 rng(seed);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.next() >> 56);
  return img;
}

// --- option holders -------------------------------------------------------

struct KeygenOpts {
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct CryptOpts {
  std::string key;
  std::size_t block_size = 16;
  std::string mode = "mixed";
  std::string scheme = "vit";
  bool dir = false;
  std::string in, out;
};

struct TransformOpts {
  std::string key;
  std::string mode = "mixed";
  std::size_t block_size = 0;
  std::string in, out;
};

struct InferOpts {
  std::string model, image, labels, backend = "parallel";
  bool json = false;
};

struct VerifyOpts {
  std::string key, model, image, mode = "mixed";
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  bool json = false;
};

struct KeyspaceOpts {
  std::size_t block_size = 16, image_size = 224, channels = 3;
  std::string mode = "mixed";
  bool json = false;
};

struct InitOpts {
  std::string preset = "toy", out;
  std::optional<std::size_t> classes;
  std::uint64_t seed = 0;
};

struct WeightsInfoOpts {
  std::string path;
  bool json = false;
};

struct RemapOpts {
  std::string mapping, input, out, unmatched = "error";
};

struct SplitOpts {
  std::string manifest, train_out, test_out;
  double fraction = 0.8;
  std::uint64_t seed = 0;
};

struct SummarizeOpts {
  std::string manifest;
  bool reference = false, json = false;
};

// --- commands ------------------------------------------------------------

int cmd_keygen(const KeygenOpts& o, std::ostream& out) {
  std::array<std::uint8_t, SecretKey::kSize> raw{};
  if (o.seed) {
    SplitMix64 rng(*o.seed);
    for (std::size_t i = 0; i < raw.size(); i += 8) {
      const std::uint64_t r = rng.next();
      for (std::size_t b = 0; b < 8; ++b) raw[i + b] = static_cast<std::uint8_t>(r >> (8 * b));
    }
  } else {
    std::random_device dev;
    for (std::size_t i = 0; i < raw.size(); i += 4) {
      const std::uint32_t r = dev();
      for (std::size_t b = 0; b < 4; ++b) raw[i + b] = static_cast<std::uint8_t>(r >> (8 * b));
    }
  }
  const std::string hex = SecretKey(raw).to_hex();
  if (o.out.empty() || o.out == "-") {
    out << hex << "\n";
  } else {
    write_file_atomic(o.out, hex + "\n");
  }
  return kOk;
}

Image crypt_one(const Image& img, const CryptOpts& o, const SecretKey& key, bool encrypt) {
  if (o.scheme == "pixel-based") return encrypt_pixel_based(img, key);
  const EncryptionParams params{o.block_size, parse_shuffle_mode(o.mode)};
  return encrypt ? encrypt_vit(img, key, params) : decrypt_vit(img, key, params);
}

int cmd_crypt(const CryptOpts& o, bool encrypt, std::ostream& out, std::ostream& err) {
  if (o.scheme != "vit" && o.scheme != "pixel-based") {
    throw UsageError("unknown scheme '" + o.scheme + "' (expected vit|pixel-based)");
  }
  if (!encrypt && o.scheme == "pixel-based") {
    throw UsageError("decrypt supports the vit scheme only");
  }
  parse_shuffle_mode(o.mode);
  const SecretKey key = resolve_key(o.key);
  if (!o.dir) {
    write_png(crypt_one(read_png(o.in), o, key, encrypt), o.out);
    return kOk;
  }

  if (!fs::is_directory(o.in)) throw Error(ErrorCode::Io, o.in + " is not a directory");
  fs::create_directories(o.out);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(o.in)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> failures(files.size());
  std::vector<int> codes(files.size(), kOk);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(files.size()); ++i) {
    try {
      write_png(crypt_one(read_png(files[i]), o, key, encrypt),
                fs::path(o.out) / files[i].filename());
    } catch (const Error& e) {
      failures[i] = e.what();
      codes[i] = exit_code_for(e.code());
    }
  }
  int rc = kOk;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (codes[i] != kOk) {
      err << files[i].string() << ": " << failures[i] << "\n";
      rc = std::max(rc, codes[i]);
    } else {
      out << files[i].filename().string() << "\n";
    }
  }
  return rc;
}

int cmd_transform(const TransformOpts& o) {
  const SecretKey key = resolve_key(o.key);
  const LoadedModel m = load_weights(o.in);
  const EncryptionParams params{o.block_size ? o.block_size : m.config.patch_size,
                                parse_shuffle_mode(o.mode)};
  save_weights(transform_model(m.weights, m.config, key, params), m.config, o.out);
  return kOk;
}

int cmd_infer(const InferOpts& o, std::ostream& out) {
  if (o.backend != "parallel" && o.backend != "serial") {
    throw UsageError("unknown backend '" + o.backend + "'");
  }
  const LoadedModel m = load_weights(o.model);
  const Image img = read_png(o.image);
  const auto backend =
      o.backend == "serial" ? kernels::Backend::Serial : kernels::Backend::Parallel;
  const auto logits = forward(m.weights, m.config, img, backend);
  const std::size_t cls = argmax(logits);
  std::string name;
  if (!o.labels.empty()) {
    const auto labels = read_labels(o.labels);
    if (cls < labels.size()) name = labels[cls];
  }
  if (o.json) {
    json j{{"schema", kJsonSchema}, {"command", "infer"}, {"class_index", cls},
           {"logits", logits}};
    j["class_name"] = name.empty() ? json(nullptr) : json(name);
    out << j.dump() << "\n";
  } else {
    out << "class " << cls;
    if (!name.empty()) out << " (" << name << ")";
    out << "\nlogits " << format_logits(logits) << "\n";
  }
  return kOk;
}

int cmd_verify(const VerifyOpts& o, std::ostream& out) {
  if (o.trials == 0) throw UsageError("--trials must be at least 1");
  const SecretKey key = resolve_key(o.key);
  const LoadedModel m = load_weights(o.model);
  const EncryptionParams params{m.config.patch_size, parse_shuffle_mode(o.mode)};
  const ModelWeights transformed = transform_model(m.weights, m.config, key, params);
  const Image first = read_png(o.image);

  double max_delta = 0.0;
  std::size_t agree = 0;
  for (std::size_t t = 0; t < o.trials; ++t) {
    const Image img = t == 0 ? first
                             : random_image(first.height, first.width, first.channels,
                                            o.seed + t);
    const auto plain = forward(m.weights, m.config, img);
    const auto enc = forward(transformed, m.config, encrypt_vit(img, key, params));
    for (std::size_t c = 0; c < plain.size(); ++c) {
      max_delta = std::max(max_delta, std::abs(static_cast<double>(plain[c]) - enc[c]));
    }
    agree += argmax(plain) == argmax(enc);
  }
  const bool ok = max_delta <= kEquivalenceTolerance && agree == o.trials;
  if (o.json) {
    out << json{{"schema", kJsonSchema},       {"command", "verify-equivalence"},
                {"trials", o.trials},          {"max_abs_logit_delta", max_delta},
                {"argmax_agreement", agree},   {"tolerance", kEquivalenceTolerance},
                {"passed", ok}}
               .dump()
        << "\n";
  } else {
    out << "trials " << o.trials << "\n"
        << "max |delta logit| " << std::setprecision(6) << max_delta << " (tolerance "
        << kEquivalenceTolerance << ")\n"
        << "argmax agreement " << agree << "/" << o.trials << "\n"
        << (ok ? "equivalent" : "NOT equivalent") << "\n";
  }
  return ok ? kOk : kVerificationFailed;
}

int cmd_keyspace(const KeyspaceOpts& o, std::ostream& out) {
  const EncryptionParams params{o.block_size, parse_shuffle_mode(o.mode)};
  const std::size_t area = o.block_size * o.block_size;
  const std::size_t pixel_domain =
      params.mode == ShuffleMode::ChannelMixing ? area * o.channels : area;
  const std::size_t blocks = (o.image_size / std::max<std::size_t>(o.block_size, 1)) *
                             (o.image_size / std::max<std::size_t>(o.block_size, 1));
  const double total = keyspace_bits(o.image_size, o.image_size, o.channels, params);
  const double pixel_bits = std::lgamma(static_cast<double>(pixel_domain) + 1.0) / std::log(2.0);
  const double block_bits = total - pixel_bits;
  if (o.json) {
    out << json{{"schema", kJsonSchema},     {"command", "keyspace"},
                {"pixel_domain", pixel_domain}, {"blocks", blocks},
                {"pixel_bits", pixel_bits},  {"block_bits", block_bits},
                {"total_bits", total}}
               .dump()
        << "\n";
  } else {
    out << std::fixed << std::setprecision(6) << "log2(" << pixel_domain << "!) = " << pixel_bits
        << "\nlog2(" << blocks << "!) = " << block_bits << "\ntotal bits = " << total << "\n";
  }
  return kOk;
}

int cmd_init(const InitOpts& o) {
  ViTConfig cfg;
  if (o.preset == "toy") {
    cfg = ViTConfig::toy();
  } else if (o.preset == "vit-s16") {
    cfg = ViTConfig::vit_s16();
  } else {
    throw UsageError("unknown preset '" + o.preset + "' (expected toy|vit-s16)");
  }
  if (o.classes) cfg.num_classes = *o.classes;
  save_weights(random_init(cfg, o.seed), cfg, o.out);
  return kOk;
}

int cmd_weights_info(const WeightsInfoOpts& o, std::ostream& out) {
  const WeightsHeader h = read_weights_header(o.path);
  const auto& c = h.config;
  if (o.json) {
    json tensors = json::array();
    for (const auto& t : h.tensors) tensors.push_back({{"name", t.name}, {"shape", t.shape}});
    out << json{{"schema", kJsonSchema},
                {"command", "weights-info"},
                {"version", h.version},
                {"image_size", c.image_size},
                {"patch_size", c.patch_size},
                {"embed_dim", c.embed_dim},
                {"depth", c.depth},
                {"heads", c.heads},
                {"mlp_ratio", c.mlp_ratio},
                {"num_classes", c.num_classes},
                {"channel_uniform_norm", c.norm.channel_uniform()},
                {"param_count", param_count(c)},
                {"tensors", tensors}}
               .dump()
        << "\n";
  } else {
    out << "format version " << h.version << "\n"
        << "image " << c.image_size << " patch " << c.patch_size << " dim " << c.embed_dim
        << " depth " << c.depth << " heads " << c.heads << " mlp_ratio " << c.mlp_ratio
        << " classes " << c.num_classes << "\n"
        << "normalization " << (c.norm.channel_uniform() ? "channel-uniform" : "per-channel")
        << "\n"
        << "tensors " << h.tensors.size() << "\n"
        << "parameters " << param_count(c) << "\n";
  }
  return kOk;
}

int cmd_remap(const RemapOpts& o, std::ostream& out) {
  dataset::MappingTable table = dataset::load_mapping_table(o.mapping);
  if (o.unmatched == "skip") {
    table.unmatched = dataset::UnmatchedPolicy::Skip;
  } else if (o.unmatched != "error") {
    throw UsageError("--unmatched must be error|skip");
  }
  const auto report = dataset::remap_labels(dataset::load_source_list(o.input), table);
  dataset::save_manifest(report.manifest, o.out);
  for (std::size_t c = 0; c < dataset::kNumCloClasses; ++c) {
    out << c << " " << dataset::display_name(static_cast<dataset::CloClass>(c)) << ": "
        << report.per_class[c] << "\n";
  }
  out << "skipped: " << report.skipped << "\n";
  for (const auto& l : report.unmatched_labels) out << "unmatched label: " << l << "\n";
  return kOk;
}

int cmd_split(const SplitOpts& o, std::ostream& out) {
  const auto s = dataset::split(dataset::load_manifest(o.manifest), o.fraction, o.seed);
  dataset::save_manifest(s.train, o.train_out);
  dataset::save_manifest(s.test, o.test_out);
  out << "train " << s.train.size() << "\ntest " << s.test.size() << "\n";
  return kOk;
}

int cmd_summarize(const SummarizeOpts& o, std::ostream& out) {
  const auto s = dataset::summarize(dataset::load_manifest(o.manifest));
  if (o.json) {
    json j{{"schema", kJsonSchema}, {"command", "dataset summarize"}, {"counts", s.counts},
           {"total", s.total}};
    if (o.reference) {
      std::size_t ref_sum = 0;
      for (auto c : dataset::kReferenceCounts) ref_sum += c;
      j["reference"] = {{"counts", dataset::kReferenceCounts},
                        {"sum", ref_sum},
                        {"stated_total", dataset::kReferenceStatedTotal},
                        {"discrepancy", static_cast<long long>(ref_sum) -
                                            static_cast<long long>(dataset::kReferenceStatedTotal)}};
    }
    out << j.dump() << "\n";
  } else {
    out << dataset::format_summary(s, o.reference);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"cloakvit: keyed block-wise image encryption with matching ViT model transformation",
               "cloakvit"};
  app.require_subcommand(1);

  std::function<int()> action;

  KeygenOpts keygen;
  auto* sc_keygen = app.add_subcommand("keygen", "Write a new 32-byte key as 64 hex chars");
  sc_keygen->add_option("-o,--output", keygen.out, "Key file (stdout when omitted)");
  sc_keygen->add_option("--seed", keygen.seed, "Deterministic key for tests");
  sc_keygen->callback([&] { action = [&] { return cmd_keygen(keygen, out); }; });

  CryptOpts enc, dec;
  auto add_crypt = [&](const char* name, const char* help, CryptOpts& o, bool encrypt) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("--key", o.key, "Key file (or CLOAKVIT_KEY)");
    sc->add_option("--block-size", o.block_size, "Block size M")->check(CLI::PositiveNumber);
    sc->add_option("--mode", o.mode, "Pixel shuffle mode")
        ->check(CLI::IsMember({"mixed", "per-channel"}));
    if (encrypt) {
      sc->add_option("--scheme", o.scheme, "vit | pixel-based")
          ->check(CLI::IsMember({"vit", "pixel-based"}));
    }
    sc->add_flag("--dir", o.dir, "Treat input/output as directories of PNG files");
    sc->add_option("input", o.in, "Input PNG")->required();
    sc->add_option("output", o.out, "Output PNG")->required();
    sc->callback([&, encrypt] { action = [&, encrypt] { return cmd_crypt(o, encrypt, out, err); }; });
  };
  add_crypt("encrypt", "Encrypt a PNG image", enc, true);
  add_crypt("decrypt", "Decrypt a PNG image (vit scheme)", dec, false);

  TransformOpts tr;
  auto* sc_tr = app.add_subcommand("transform-model", "Produce the key-matched model");
  sc_tr->add_option("--key", tr.key, "Key file (or CLOAKVIT_KEY)");
  sc_tr->add_option("--mode", tr.mode)->check(CLI::IsMember({"mixed", "per-channel"}));
  sc_tr->add_option("--block-size", tr.block_size, "Defaults to the model patch size");
  sc_tr->add_option("input", tr.in, "Input .vtw")->required();
  sc_tr->add_option("output", tr.out, "Output .vtw")->required();
  sc_tr->callback([&] { action = [&] { return cmd_transform(tr); }; });

  InferOpts inf;
  auto* sc_inf = app.add_subcommand("infer", "Classify an image");
  sc_inf->add_option("--model", inf.model)->required();
  sc_inf->add_option("--image", inf.image)->required();
  sc_inf->add_option("--labels", inf.labels, "Class names, one per line");
  sc_inf->add_option("--backend", inf.backend, "parallel | serial");
  sc_inf->add_flag("--json", inf.json);
  sc_inf->callback([&] { action = [&] { return cmd_infer(inf, out); }; });

  VerifyOpts ver;
  auto* sc_ver = app.add_subcommand("verify-equivalence",
                                    "Check plain vs encrypted-domain inference agree");
  sc_ver->add_option("--key", ver.key, "Key file (or CLOAKVIT_KEY)");
  sc_ver->add_option("--model", ver.model)->required();
  sc_ver->add_option("--image", ver.image)->required();
  sc_ver->add_option("--trials", ver.trials, "Trials beyond the first use random images");
  sc_ver->add_option("--seed", ver.seed, "Seed for the random trial images");
  sc_ver->add_option("--mode", ver.mode)->check(CLI::IsMember({"mixed", "per-channel"}));
  sc_ver->add_flag("--json", ver.json);
  sc_ver->callback([&] { action = [&] { return cmd_verify(ver, out); }; });

  KeyspaceOpts ks;
  auto* sc_ks = app.add_subcommand("keyspace", "log2 of the key space size");
  sc_ks->add_option("--block-size", ks.block_size)->check(CLI::PositiveNumber);
  sc_ks->add_option("--image-size", ks.image_size)->check(CLI::PositiveNumber);
  sc_ks->add_option("--channels", ks.channels)->check(CLI::PositiveNumber);
  sc_ks->add_option("--mode", ks.mode)->check(CLI::IsMember({"mixed", "per-channel"}));
  sc_ks->add_flag("--json", ks.json);
  sc_ks->callback([&] { action = [&] { return cmd_keyspace(ks, out); }; });

  InitOpts init;
  auto* sc_init = app.add_subcommand("init-model", "Write a randomly initialized model");
  sc_init->add_option("--preset", init.preset, "toy | vit-s16");
  sc_init->add_option("--classes", init.classes);
  sc_init->add_option("--seed", init.seed);
  sc_init->add_option("-o,--output", init.out)->required();
  sc_init->callback([&] { action = [&] { return cmd_init(init); }; });

  WeightsInfoOpts wi;
  auto* sc_wi = app.add_subcommand("weights-info", "Describe a .vtw file");
  sc_wi->add_option("path", wi.path)->required();
  sc_wi->add_flag("--json", wi.json);
  sc_wi->callback([&] { action = [&] { return cmd_weights_info(wi, out); }; });

  auto* sc_ds = app.add_subcommand("dataset", "Manifest tooling");
  sc_ds->require_subcommand(1);
  RemapOpts rm;
  auto* sc_rm = sc_ds->add_subcommand("remap", "Map source labels to clo classes");
  sc_rm->add_option("--mapping", rm.mapping, "JSON mapping table")->required();
  sc_rm->add_option("--input", rm.input, "path<TAB>label list")->required();
  sc_rm->add_option("-o,--output", rm.out)->required();
  sc_rm->add_option("--unmatched", rm.unmatched, "error | skip");
  sc_rm->callback([&] { action = [&] { return cmd_remap(rm, out); }; });
  SplitOpts sp;
  auto* sc_sp = sc_ds->add_subcommand("split", "Seeded train/test split");
  sc_sp->add_option("--manifest", sp.manifest)->required();
  sc_sp->add_option("--train-fraction", sp.fraction);
  sc_sp->add_option("--seed", sp.seed);
  sc_sp->add_option("--train-out", sp.train_out)->required();
  sc_sp->add_option("--test-out", sp.test_out)->required();
  sc_sp->callback([&] { action = [&] { return cmd_split(sp, out); }; });
  SummarizeOpts sm;
  auto* sc_sm = sc_ds->add_subcommand("summarize", "Per-class counts");
  sc_sm->add_option("--manifest", sm.manifest)->required();
  sc_sm->add_flag("--reference", sm.reference, "Append published DeepFashion counts");
  sc_sm->add_flag("--json", sm.json);
  sc_sm->callback([&] { action = [&] { return cmd_summarize(sm, out); }; });

  std::vector<const char*> cargs;
  cargs.reserve(argv.size());
  for (const auto& a : argv) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kUsage;
  }

  try {
    return action ? action() : kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error (io): " << e.what() << "\n";
    return kIoFormat;
  }
}

}  // namespace cloakvit::cli
