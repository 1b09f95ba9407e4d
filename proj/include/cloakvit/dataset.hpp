#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cloakvit::dataset {

inline constexpr std::size_t kNumCloClasses = 4;

enum class CloClass : std::uint8_t {
  Sleeveless = 0,
  ShortSleeveShirt = 1,
  LongSleeveShirt = 2,
  Outerwear = 3,
};

struct CloCategory {
  CloClass id;
  std::string_view name;
  std::optional<double> clo_value;
};

std::string_view display_name(CloClass c);
/// Throws ErrorCode::Format for ids outside 0..3.
CloClass clo_class_from_id(long long id);

struct SourceEntry {
  std::string image_path;
  std::string source_label;
};

struct ManifestEntry {
  std::string image_path;
  std::string source_label;
  CloClass clo_class;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

using Manifest = std::vector<ManifestEntry>;

enum class UnmatchedPolicy { Error, Skip };

/// Patterns are ECMAScript regular expressions searched anywhere in the
/// source label, so a bare word matches as a substring.
struct MappingRule {
  std::string pattern;
  CloClass clo_class;
};

struct MappingTable {
  std::vector<MappingRule> rules;
  UnmatchedPolicy unmatched = UnmatchedPolicy::Error;
};

/// JSON list of {"pattern": str, "clo_class": 0..3}.
MappingTable parse_mapping_table(std::string_view json_text);
MappingTable load_mapping_table(const std::filesystem::path& path);

struct RemapReport {
  Manifest manifest;
  std::array<std::size_t, kNumCloClasses> per_class{};
  std::size_t skipped = 0;
  std::vector<std::string> unmatched_labels;  // distinct, in first-seen order
};

RemapReport remap_labels(const std::vector<SourceEntry>& entries, const MappingTable& table);

struct Split {
  Manifest train;
  Manifest test;
};

/// Seeded Fisher-Yates order; the first floor(n * train_fraction) entries train.
Split split(const Manifest& manifest, double train_fraction, std::uint64_t seed);

struct Summary {
  std::array<std::size_t, kNumCloClasses> counts{};
  std::size_t total = 0;

  double percent(CloClass c) const;
  friend bool operator==(const Summary&, const Summary&) = default;
};

Summary summarize(const Manifest& manifest);

/// Published DeepFashion clo-category counts and stated dataset total.
inline constexpr std::array<std::size_t, kNumCloClasses> kReferenceCounts{11033, 8176, 4218, 3586};
inline constexpr std::size_t kReferenceStatedTotal = 26887;

/// Human-readable table; with `with_reference` the published counts and the
/// gap between their sum and the stated total are appended.
std::string format_summary(const Summary& s, bool with_reference);

// Manifest text: `path<TAB>label<TAB>clo_id` per line, `#` lines ignored.
Manifest parse_manifest(std::string_view text);
std::string format_manifest(const Manifest& manifest);
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// `path<TAB>label` lines (a third column, if present, is ignored).
std::vector<SourceEntry> parse_source_list(std::string_view text);
std::vector<SourceEntry> load_source_list(const std::filesystem::path& path);

}  // namespace cloakvit::dataset
