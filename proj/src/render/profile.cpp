#include "wysiwim/profile.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wysiwim/error.hpp"

namespace wysiwim::render {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

char single_char(const nlohmann::json& doc, const char* field) {
  const auto value = doc.at(field).get<std::string>();
  if (value.size() != 1) {
    throw ConfigError(std::string("profile field '") + field +
                      "' must be a one-character string, got \"" + value + "\"");
  }
  return value[0];
}

}  // namespace

void LanguageProfile::validate() const {
  if (name.empty()) {
    throw ConfigError("language profile has an empty name");
  }
  if (keywords.empty()) {
    throw ConfigError("language profile '" + name + "' has no keywords");
  }
  for (const auto& kw : keywords) {
    if (kw.empty() || std::any_of(kw.begin(), kw.end(), is_space)) {
      throw ConfigError("language profile '" + name + "' has an invalid keyword \"" + kw + "\"");
    }
  }
  if (line_comment.empty() || block_comment_open.empty() || block_comment_close.empty()) {
    throw ConfigError("language profile '" + name + "' has an empty comment delimiter");
  }
}

LanguageProfile java_profile() {
  LanguageProfile p;
  p.name = "java";
  p.keywords = {
      "abstract", "assert",     "boolean",   "break",     "byte",      "case",
      "catch",    "char",       "class",     "const",     "continue",  "default",
      "do",       "double",     "else",      "enum",      "extends",   "false",
      "final",    "finally",    "float",     "for",       "goto",      "if",
      "implements", "import",   "instanceof", "int",      "interface", "long",
      "native",   "new",        "null",      "package",   "private",   "protected",
      "public",   "return",     "short",     "static",    "strictfp",  "super",
      "switch",   "synchronized", "this",    "throw",     "throws",    "transient",
      "true",     "try",        "var",       "void",      "volatile",  "while",
  };
  p.line_comment = "//";
  p.block_comment_open = "/*";
  p.block_comment_close = "*/";
  return p;
}

LanguageProfile c_profile() {
  LanguageProfile p;
  p.name = "c";
  p.keywords = {
      "auto",     "break",    "case",     "char",     "const",    "continue",
      "default",  "do",       "double",   "else",     "enum",     "extern",
      "float",    "for",      "goto",     "if",       "inline",   "int",
      "long",     "register", "restrict", "return",   "short",    "signed",
      "sizeof",   "static",   "struct",   "switch",   "typedef",  "union",
      "unsigned", "void",     "volatile", "while",    "_Bool",    "_Complex",
      "_Imaginary",
  };
  p.line_comment = "//";
  p.block_comment_open = "/*";
  p.block_comment_close = "*/";
  return p;
}

LanguageProfile parse_profile(std::string_view json_text) {
  LanguageProfile p;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    p.name = doc.at("name").get<std::string>();
    for (const auto& kw : doc.at("keywords")) {
      p.keywords.insert(kw.get<std::string>());
    }
    p.line_comment = doc.at("line_comment").get<std::string>();
    p.block_comment_open = doc.at("block_comment_open").get<std::string>();
    p.block_comment_close = doc.at("block_comment_close").get<std::string>();
    p.string_delim = single_char(doc, "string_delim");
    p.char_delim = single_char(doc, "char_delim");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid language profile: ") + e.what());
  }
  p.validate();
  return p;
}

LanguageProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open language profile " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_profile(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ProfileRegistry::ProfileRegistry() {
  add(java_profile());
  add(c_profile());
}

void ProfileRegistry::add(LanguageProfile profile) {
  profile.validate();
  auto name = profile.name;
  profiles_.insert_or_assign(std::move(name), std::move(profile));
}

bool ProfileRegistry::contains(std::string_view name) const {
  return profiles_.find(name) != profiles_.end();
}

const LanguageProfile& ProfileRegistry::get(std::string_view name) const {
  auto it = profiles_.find(name);
  if (it == profiles_.end()) {
    throw ConfigError("unknown language profile '" + std::string(name) + "'");
  }
  return it->second;
}

std::set<std::string> ProfileRegistry::names() const {
  std::set<std::string> out;
  for (const auto& [name, _] : profiles_) {
    out.insert(name);
  }
  return out;
}

}  // namespace wysiwim::render
