#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wysiwim/profile.hpp"

namespace wysiwim::data {

struct ManifestEntry {
  std::string id;
  // Relative paths in a manifest file are resolved against its directory.
  std::filesystem::path path;
  std::optional<std::string> label;
  std::string language;
};

// Snippet index, in file order. Ids are unique and non-empty and every
// language resolves to a known profile.
struct CorpusManifest {
  std::vector<ManifestEntry> entries;

  const ManifestEntry* find(std::string_view id) const;
  std::set<std::string, std::less<>> ids() const;
  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
};

// JSONL, one {"id", "path", "label"?, "language"} object per non-empty line.
// Errors are IngestionError with "<source>:<line>:" prefixes.
CorpusManifest load_manifest(const std::filesystem::path& path,
                             const render::ProfileRegistry& profiles);
CorpusManifest parse_manifest(std::istream& in, const render::ProfileRegistry& profiles,
                              const std::filesystem::path& base_dir = {},
                              std::string_view source_name = "<manifest>");

// Labelled snippet pair; label true means semantic clone.
struct ClonePair {
  std::string id_a;
  std::string id_b;
  bool label = false;

  friend bool operator==(const ClonePair&, const ClonePair&) = default;
};

using ClonePairList = std::vector<ClonePair>;

// CSV with header `id_a,id_b,label`, label in {0,1}. Fields may be double
// quoted. Rejects unknown ids, self pairs and repeated unordered pairs with
// IngestionError naming the 1-based file line.
ClonePairList load_pairs(const std::filesystem::path& path, const CorpusManifest& manifest);
ClonePairList load_pairs(const std::filesystem::path& path,
                         const std::set<std::string, std::less<>>& known_ids);
ClonePairList parse_pairs(std::istream& in, const std::set<std::string, std::less<>>& known_ids,
                          std::string_view source_name = "<pairs>");

// Minimal RFC 4180 field splitter shared by the CSV readers.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace wysiwim::data
