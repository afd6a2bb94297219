#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "wysiwim/corpus.hpp"
#include "wysiwim/error.hpp"

namespace wysiwim::data {
namespace {

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
  throw IngestionError(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::string required_string(const nlohmann::json& obj, const char* field, std::string_view source,
                            std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    fail(source, line, std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

const ManifestEntry* CorpusManifest::find(std::string_view id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

std::set<std::string, std::less<>> CorpusManifest::ids() const {
  std::set<std::string, std::less<>> out;
  for (const auto& e : entries) out.insert(e.id);
  return out;
}

CorpusManifest parse_manifest(std::istream& in, const render::ProfileRegistry& profiles,
                              const std::filesystem::path& base_dir,
                              std::string_view source_name) {
  CorpusManifest manifest;
  std::map<std::string, std::size_t, std::less<>> first_seen;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (is_blank(text)) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      fail(source_name, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) {
      fail(source_name, line_no, "expected a JSON object");
    }

    ManifestEntry entry;
    entry.id = required_string(obj, "id", source_name, line_no);
    if (entry.id.empty()) {
      fail(source_name, line_no, "empty id");
    }
    const std::string path = required_string(obj, "path", source_name, line_no);
    if (path.empty()) {
      fail(source_name, line_no, "empty path");
    }
    entry.path = std::filesystem::path(path);
    if (entry.path.is_relative() && !base_dir.empty()) {
      entry.path = base_dir / entry.path;
    }
    entry.language = required_string(obj, "language", source_name, line_no);
    if (!profiles.contains(entry.language)) {
      fail(source_name, line_no, "unknown language '" + entry.language + "'");
    }
    if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) {
        fail(source_name, line_no, "field 'label' must be a string");
      }
      entry.label = it->get<std::string>();
    }

    if (auto [it, inserted] = first_seen.try_emplace(entry.id, line_no); !inserted) {
      fail(source_name, line_no,
           "duplicate id '" + entry.id + "' (first seen on line " + std::to_string(it->second) + ")");
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

CorpusManifest load_manifest(const std::filesystem::path& path,
                             const render::ProfileRegistry& profiles) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open manifest " + path.string());
  }
  return parse_manifest(in, profiles, path.parent_path(), path.string());
}

}  // namespace wysiwim::data
