#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
std::vector<std::uint8_t> read_bytes(const fs::path& path);

// Printable ASCII plus tabs and newlines, biased towards lexer edge cases
// (comment openers, quotes, escapes, decimal points).
std::string random_ascii_source(std::mt19937_64& rng, std::size_t max_length);

struct Snippet {
  std::string id;
  std::string text;
  std::string label;  // seed family
};

// Ten hand-written Java methods.
const std::vector<std::string>& seed_snippets();

// Consistent identifier renaming of a seed.
std::string rename_identifiers(const std::string& source, int seed_index);
// Same tokens, different indentation and line breaks.
std::string reflow_whitespace(const std::string& source);

// 50 snippets: every seed plus four variants of it.
std::vector<Snippet> snippet_corpus();

struct PairSpec {
  std::string id_a;
  std::string id_b;
  bool label;
};

struct MicroCorpus {
  std::vector<Snippet> snippets;
  std::vector<PairSpec> pairs;  // 20 positive, then 20 negative
};

// Positives are renamings, reflows and verbatim copies of a seed; negatives
// join snippets of different seeds.
MicroCorpus micro_corpus();

struct CorpusFiles {
  fs::path manifest;
  fs::path pairs;
};

// Writes one .java file per snippet, a JSONL manifest and, when pairs are
// given, a pairs CSV.
CorpusFiles write_corpus(const fs::path& dir, const std::vector<Snippet>& snippets,
                         const std::vector<PairSpec>& pairs = {});

}  // namespace fixtures
