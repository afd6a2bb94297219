#include <fstream>
#include <map>
#include <string>
#include <utility>

#include "wysiwim/corpus.hpp"
#include "wysiwim/error.hpp"

namespace wysiwim::data {
namespace {

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
  throw IngestionError(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"' && trim(current).empty()) {
      current.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? current : std::string(trim(current)));
      current.clear();
      was_quoted = false;
    } else if (!(was_quoted && (c == ' ' || c == '\t' || c == '\r'))) {
      current.push_back(c);
    }
  }
  fields.push_back(was_quoted ? current : std::string(trim(current)));
  return fields;
}

ClonePairList parse_pairs(std::istream& in, const std::set<std::string, std::less<>>& known_ids,
                          std::string_view source_name) {
  ClonePairList pairs;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  std::string text;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, text)) {
    ++line_no;
    if (trim(text).empty()) continue;
    const auto fields = split_csv_line(text);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"id_a", "id_b", "label"}) {
        fail(source_name, line_no, "expected header 'id_a,id_b,label'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      fail(source_name, line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    ClonePair pair{fields[0], fields[1], false};
    if (fields[2] == "1") {
      pair.label = true;
    } else if (fields[2] != "0") {
      fail(source_name, line_no, "label must be 0 or 1, got '" + fields[2] + "'");
    }
    for (const auto* id : {&pair.id_a, &pair.id_b}) {
      if (!known_ids.contains(*id)) {
        fail(source_name, line_no, "unknown id '" + *id + "'");
      }
    }
    if (pair.id_a == pair.id_b) {
      fail(source_name, line_no, "self pair '" + pair.id_a + "'");
    }
    auto key = std::minmax(pair.id_a, pair.id_b);
    if (auto [it, inserted] = seen.try_emplace({key.first, key.second}, line_no); !inserted) {
      fail(source_name, line_no,
           "duplicate unordered pair (" + pair.id_a + ", " + pair.id_b + "), first on line " +
               std::to_string(it->second));
    }
    pairs.push_back(std::move(pair));
  }
  if (!header_seen) {
    fail(source_name, 1, "missing header 'id_a,id_b,label'");
  }
  return pairs;
}

ClonePairList load_pairs(const std::filesystem::path& path,
                         const std::set<std::string, std::less<>>& known_ids) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open pair list " + path.string());
  }
  return parse_pairs(in, known_ids, path.string());
}

ClonePairList load_pairs(const std::filesystem::path& path, const CorpusManifest& manifest) {
  return load_pairs(path, manifest.ids());
}

}  // namespace wysiwim::data
