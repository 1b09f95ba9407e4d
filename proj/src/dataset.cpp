#include "cloakvit/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "cloakvit/error.hpp"
#include "cloakvit/file_util.hpp"
#include "cloakvit/permkey.hpp"

namespace cloakvit::dataset {

using json = nlohmann::json;

std::string_view display_name(CloClass c) {
  switch (c) {
    case CloClass::Sleeveless: return "sleeveless";
    case CloClass::ShortSleeveShirt: return "short-sleeve shirt";
    case CloClass::LongSleeveShirt: return "long-sleeve shirt";
    case CloClass::Outerwear: return "outerwear";
  }
  return "?";
}

CloClass clo_class_from_id(long long id) {
  if (id < 0 || id >= static_cast<long long>(kNumCloClasses)) {
    throw Error(ErrorCode::Format, "clo class id " + std::to_string(id) + " is not in 0..3");
  }
  return static_cast<CloClass>(id);
}

MappingTable parse_mapping_table(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("mapping table is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::Format, "mapping table must be a JSON list");
  MappingTable table;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& rule = j[i];
    if (!rule.is_object() || !rule.contains("pattern") || !rule.contains("clo_class") ||
        !rule["pattern"].is_string() || !rule["clo_class"].is_number_integer()) {
      throw Error(ErrorCode::Format, "mapping rule " + std::to_string(i) +
                                         " needs a string 'pattern' and an integer 'clo_class'");
    }
    auto pattern = rule["pattern"].get<std::string>();
    if (pattern.empty()) {
      throw Error(ErrorCode::Format, "mapping rule " + std::to_string(i) + " has an empty pattern");
    }
    try {
      std::regex check(pattern);
    } catch (const std::regex_error&) {
      throw Error(ErrorCode::Format, "mapping rule " + std::to_string(i) +
                                         " has an invalid pattern: " + pattern);
    }
    table.rules.push_back({std::move(pattern), clo_class_from_id(rule["clo_class"].get<long long>())});
  }
  return table;
}

MappingTable load_mapping_table(const std::filesystem::path& path) {
  return parse_mapping_table(read_file_text(path));
}

RemapReport remap_labels(const std::vector<SourceEntry>& entries, const MappingTable& table) {
  std::vector<std::regex> compiled;
  compiled.reserve(table.rules.size());
  for (const auto& r : table.rules) compiled.emplace_back(r.pattern);

  RemapReport report;
  std::unordered_set<std::string> seen_unmatched;
  for (const auto& entry : entries) {
    std::optional<CloClass> hit;
    for (std::size_t r = 0; r < compiled.size() && !hit; ++r) {
      if (std::regex_search(entry.source_label, compiled[r])) hit = table.rules[r].clo_class;
    }
    if (!hit) {
      if (table.unmatched == UnmatchedPolicy::Error) {
        throw Error(ErrorCode::UnmatchedLabel, "no mapping rule matches label '" +
                                                   entry.source_label + "' (" + entry.image_path +
                                                   ")");
      }
      ++report.skipped;
      if (seen_unmatched.insert(entry.source_label).second) {
        report.unmatched_labels.push_back(entry.source_label);
      }
      continue;
    }
    report.manifest.push_back({entry.image_path, entry.source_label, *hit});
    ++report.per_class[static_cast<std::size_t>(*hit)];
  }
  return report;
}

Split split(const Manifest& manifest, double train_fraction, std::uint64_t seed) {
  if (manifest.empty()) throw Error(ErrorCode::EmptyManifest, "cannot split an empty manifest");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::Config, "train fraction must lie strictly between 0 and 1");
  }
  const auto order = gen_permutation(StreamSeed{seed}, manifest.size());
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(manifest.size()) * train_fraction));
  Split s;
  s.train.reserve(n_train);
  s.test.reserve(manifest.size() - n_train);
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    (i < n_train ? s.train : s.test).push_back(manifest[order[i]]);
  }
  return s;
}

double Summary::percent(CloClass c) const {
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(counts[static_cast<std::size_t>(c)]) /
         static_cast<double>(total);
}

Summary summarize(const Manifest& manifest) {
  Summary s;
  for (const auto& e : manifest) ++s.counts[static_cast<std::size_t>(e.clo_class)];
  s.total = manifest.size();
  return s;
}

std::string format_summary(const Summary& s, bool with_reference) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-3s %-20s %10s %8s\n", "id", "category", "count", "share");
  out << line;
  for (std::size_t c = 0; c < kNumCloClasses; ++c) {
    const auto cls = static_cast<CloClass>(c);
    std::snprintf(line, sizeof line, "%-3zu %-20s %10zu %7.2f%%\n", c,
                  std::string(display_name(cls)).c_str(), s.counts[c], s.percent(cls));
    out << line;
  }
  std::snprintf(line, sizeof line, "%-24s %10zu\n", "total", s.total);
  out << line;
  if (with_reference) {
    std::size_t ref_sum = 0;
    out << "\nreference (DeepFashion clo categories, published counts)\n";
    for (std::size_t c = 0; c < kNumCloClasses; ++c) {
      ref_sum += kReferenceCounts[c];
      const long long diff =
          static_cast<long long>(s.counts[c]) - static_cast<long long>(kReferenceCounts[c]);
      std::snprintf(line, sizeof line, "%-3zu %-20s %10zu   (this manifest %+lld)\n", c,
                    std::string(display_name(static_cast<CloClass>(c))).c_str(),
                    kReferenceCounts[c], diff);
      out << line;
    }
    std::snprintf(line, sizeof line,
                  "sum of reference counts %zu vs stated total %zu (discrepancy %lld)\n", ref_sum,
                  kReferenceStatedTotal,
                  static_cast<long long>(ref_sum) - static_cast<long long>(kReferenceStatedTotal));
    out << line;
  }
  return out.str();
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

// Calls fn(line_number, fields) for every non-blank, non-comment line.
template <typename Fn>
void for_each_record(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    fn(line_no, split_tabs(line));
  }
}

}  // namespace

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
    const std::string where = "manifest line " + std::to_string(line_no);
    if (f.size() != 3) throw Error(ErrorCode::Format, where + ": expected 3 tab-separated fields");
    if (f[0].empty()) throw Error(ErrorCode::Format, where + ": empty image path");
    long long id = -1;
    try {
      std::size_t used = 0;
      id = std::stoll(std::string(f[2]), &used);
      if (used != f[2].size()) id = -1;
    } catch (const std::exception&) {
      id = -1;
    }
    if (id < 0 || id >= static_cast<long long>(kNumCloClasses)) {
      throw Error(ErrorCode::Format, where + ": clo class must be 0..3");
    }
    m.push_back({std::string(f[0]), std::string(f[1]), static_cast<CloClass>(id)});
  });
  return m;
}

std::string format_manifest(const Manifest& manifest) {
  std::string out;
  for (const auto& e : manifest) {
    out += e.image_path;
    out += '\t';
    out += e.source_label;
    out += '\t';
    out += std::to_string(static_cast<int>(e.clo_class));
    out += '\n';
  }
  return out;
}

Manifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file_text(path));
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  write_file_atomic(path, format_manifest(manifest));
}

std::vector<SourceEntry> parse_source_list(std::string_view text) {
  std::vector<SourceEntry> entries;
  for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
    if (f.size() < 2 || f.size() > 3 || f[0].empty()) {
      throw Error(ErrorCode::Format, "source list line " + std::to_string(line_no) +
                                         ": expected path<TAB>label");
    }
    entries.push_back({std::string(f[0]), std::string(f[1])});
  });
  return entries;
}

std::vector<SourceEntry> load_source_list(const std::filesystem::path& path) {
  return parse_source_list(read_file_text(path));
}

}  // namespace cloakvit::dataset
