#include "fixtures.hpp"

#include <fstream>
#include <iterator>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fixtures {

TempDir::TempDir() {
  std::random_device rd;
  const auto base = fs::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = base / ("wysiwim-test-" + std::to_string(rd()) + std::to_string(rd()));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("could not create a temporary directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  const auto text = read_text(path);
  return {text.begin(), text.end()};
}

std::string random_ascii_source(std::mt19937_64& rng, std::size_t max_length) {
  static const std::vector<std::string> pieces = {
      "int",  "for", "while", "return", "x1",  "_tmp", "Foo", "12",  "3.14", "7.", ".5",
      "//",   "/*",  "*/",    "\"",     "'",   "\\",   "\\\"", " ",  "\t",   "\n", "\r\n",
      "\r",   "{",   "}",     "(",      ")",   ";",    "+=",  "/",   "*",    "#",  "~",
  };
  std::uniform_int_distribution<std::size_t> length(0, max_length);
  std::uniform_int_distribution<int> mode(0, 2);
  std::uniform_int_distribution<std::size_t> piece(0, pieces.size() - 1);
  std::uniform_int_distribution<int> printable(32, 126);
  const std::size_t n = length(rng);
  std::string out;
  while (out.size() < n) {
    if (mode(rng) == 0) {
      out += static_cast<char>(printable(rng));
    } else {
      out += pieces[piece(rng)];
    }
  }
  out.resize(n);
  return out;
}

const std::vector<std::string>& seed_snippets() {
  static const std::vector<std::string> seeds = {
      "public int sum(int[] values) {\n"
      "    int total = 0;\n"
      "    for (int i = 0; i < values.length; i++) {\n"
      "        total += values[i];\n"
      "    }\n"
      "    return total;\n"
      "}\n",

      "public static long factorial(int n) {\n"
      "    long result = 1;\n"
      "    while (n > 1) {\n"
      "        result *= n;\n"
      "        n--;\n"
      "    }\n"
      "    return result;\n"
      "}\n",

      "boolean isPalindrome(String text) {\n"
      "    int left = 0;\n"
      "    int right = text.length() - 1;\n"
      "    while (left < right) {\n"
      "        if (text.charAt(left) != text.charAt(right)) {\n"
      "            return false;\n"
      "        }\n"
      "        left++;\n"
      "        right--;\n"
      "    }\n"
      "    return true;\n"
      "}\n",

      "int maxOf(int[] data) {\n"
      "    int best = data[0];\n"
      "    for (int k = 1; k < data.length; k++) {\n"
      "        if (data[k] > best) best = data[k];\n"
      "    }\n"
      "    return best;\n"
      "}\n",

      "void bubbleSort(int[] arr) {\n"
      "    for (int i = 0; i < arr.length; i++) {\n"
      "        for (int j = 0; j + 1 < arr.length - i; j++) {\n"
      "            if (arr[j] > arr[j + 1]) {\n"
      "                int swap = arr[j];\n"
      "                arr[j] = arr[j + 1];\n"
      "                arr[j + 1] = swap;\n"
      "            }\n"
      "        }\n"
      "    }\n"
      "}\n",

      "static int gcd(int a, int b) {\n"
      "    // Euclid\n"
      "    while (b != 0) {\n"
      "        int r = a % b;\n"
      "        a = b;\n"
      "        b = r;\n"
      "    }\n"
      "    return a;\n"
      "}\n",

      "String reverse(String input) {\n"
      "    StringBuilder builder = new StringBuilder();\n"
      "    for (int p = input.length() - 1; p >= 0; p--) {\n"
      "        builder.append(input.charAt(p));\n"
      "    }\n"
      "    return builder.toString();\n"
      "}\n",

      "double average(double[] xs) {\n"
      "    if (xs.length == 0) {\n"
      "        return 0.0;\n"
      "    }\n"
      "    double acc = 0.0;\n"
      "    for (double x : xs) acc += x;\n"
      "    return acc / xs.length;\n"
      "}\n",

      "int countVowels(String word) {\n"
      "    int count = 0;\n"
      "    for (char ch : word.toCharArray()) {\n"
      "        switch (ch) {\n"
      "            case 'a': case 'e': case 'i': case 'o': case 'u':\n"
      "                count++;\n"
      "                break;\n"
      "            default:\n"
      "                break;\n"
      "        }\n"
      "    }\n"
      "    return count;\n"
      "}\n",

      "/* binary search over a sorted array */\n"
      "int indexOf(int[] sorted, int key) {\n"
      "    int lo = 0, hi = sorted.length - 1;\n"
      "    while (lo <= hi) {\n"
      "        int mid = (lo + hi) >>> 1;\n"
      "        if (sorted[mid] < key) lo = mid + 1;\n"
      "        else if (sorted[mid] > key) hi = mid - 1;\n"
      "        else return mid;\n"
      "    }\n"
      "    return -1;\n"
      "}\n",
  };
  return seeds;
}

std::string rename_identifiers(const std::string& source, int seed_index) {
  static const std::set<std::string> fixed = {
      "public", "static", "int",     "long",      "boolean",   "void",   "double", "char",
      "for",    "while",  "if",      "else",      "return",    "new",    "switch", "case",
      "break",  "default", "true",   "false",     "String",    "StringBuilder",
      "length", "charAt", "append",  "toString",  "toCharArray", "Euclid", "binary",
      "search", "over",   "a",       "sorted",    "array",     "e",      "i",      "o",
      "u"};
  static const std::regex word("[A-Za-z_][A-Za-z0-9_]*");
  std::map<std::string, std::string> names;
  std::string out;
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(source.begin(), source.end(), word);
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const auto pos = static_cast<std::size_t>(m.position(0));
    // Leave character literals such as 'a' alone.
    const bool in_char = pos > 0 && source[pos - 1] == '\'';
    std::string w = m.str(0);
    if (!fixed.contains(w) && !in_char) {
      auto [entry, inserted] = names.try_emplace(w, "");
      if (inserted) {
        entry->second = "v" + std::to_string(seed_index) + "_" + std::to_string(names.size());
      }
      w = entry->second;
    }
    out += source.substr(last, pos - last) + w;
    last = pos + static_cast<std::size_t>(m.length(0));
  }
  return out + source.substr(last);
}

std::string reflow_whitespace(const std::string& source) {
  std::istringstream in(source);
  std::string line;
  std::string out;
  int depth = 0;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    std::string body = line.substr(first);
    if (body.front() == '}') --depth;
    const bool opens = body.size() > 2 && body.ends_with(" {");
    const std::string indent(static_cast<std::size_t>(2 * std::max(depth, 0)), ' ');
    if (opens) {
      out += indent + body.substr(0, body.size() - 2) + "\n" + indent + "{\n";
    } else {
      out += indent + body + "\n";
    }
    for (char c : body) {
      if (c == '{') ++depth;
      if (c == '}') --depth;
    }
    if (body.front() == '}') ++depth;
  }
  return out;
}

namespace {

std::string seed_id(std::size_t i, const std::string& variant) {
  return "s" + std::string(i < 10 ? "0" : "") + std::to_string(i) + "_" + variant;
}

std::string family(std::size_t i) { return "fam" + std::string(i < 10 ? "0" : "") + std::to_string(i); }

}  // namespace

std::vector<Snippet> snippet_corpus() {
  std::vector<Snippet> out;
  const auto& seeds = seed_snippets();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& s = seeds[i];
    const auto renamed = rename_identifiers(s, static_cast<int>(i));
    out.push_back({seed_id(i, "orig"), s, family(i)});
    out.push_back({seed_id(i, "rename"), renamed, family(i)});
    out.push_back({seed_id(i, "reflow"), reflow_whitespace(s), family(i)});
    out.push_back({seed_id(i, "both"), reflow_whitespace(renamed), family(i)});
    out.push_back({seed_id(i, "note"), "// variant of seed " + std::to_string(i) + "\n" + s, family(i)});
  }
  return out;
}

MicroCorpus micro_corpus() {
  MicroCorpus c;
  const auto& seeds = seed_snippets();
  const std::size_t n = seeds.size();
  for (std::size_t i = 0; i < n; ++i) {
    c.snippets.push_back({seed_id(i, "orig"), seeds[i], family(i)});
    c.snippets.push_back({seed_id(i, "rename"), rename_identifiers(seeds[i], static_cast<int>(i)), family(i)});
    if (i < 8) c.snippets.push_back({seed_id(i, "reflow"), reflow_whitespace(seeds[i]), family(i)});
    if (i < 2) c.snippets.push_back({seed_id(i, "copy"), seeds[i], family(i)});
  }
  for (std::size_t i = 0; i < n; ++i) c.pairs.push_back({seed_id(i, "orig"), seed_id(i, "rename"), true});
  for (std::size_t i = 0; i < 8; ++i) c.pairs.push_back({seed_id(i, "orig"), seed_id(i, "reflow"), true});
  for (std::size_t i = 0; i < 2; ++i) c.pairs.push_back({seed_id(i, "orig"), seed_id(i, "copy"), true});
  for (std::size_t i = 0; i < n; ++i) {
    c.pairs.push_back({seed_id(i, "orig"), seed_id((i + 3) % n, "orig"), false});
  }
  for (std::size_t i = 0; i < n; ++i) {
    c.pairs.push_back({seed_id(i, "rename"), seed_id((i + 5) % n, "orig"), false});
  }
  return c;
}

CorpusFiles write_corpus(const fs::path& dir, const std::vector<Snippet>& snippets,
                         const std::vector<PairSpec>& pairs) {
  CorpusFiles files{dir / "manifest.jsonl", dir / "pairs.csv"};
  std::string manifest;
  for (const auto& s : snippets) {
    const std::string rel = "src/" + s.id + ".java";
    write_text(dir / rel, s.text);
    nlohmann::json line = {{"id", s.id}, {"path", rel}, {"language", "java"}};
    if (!s.label.empty()) line["label"] = s.label;
    manifest += line.dump() + "\n";
  }
  write_text(files.manifest, manifest);
  std::string csv = "id_a,id_b,label\n";
  for (const auto& p : pairs) csv += p.id_a + "," + p.id_b + "," + (p.label ? "1" : "0") + "\n";
  write_text(files.pairs, csv);
  return files;
}

}  // namespace fixtures
