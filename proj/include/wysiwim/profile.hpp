#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace wysiwim::render {

// Lexical conventions of one source language.
struct LanguageProfile {
  std::string name;
  std::set<std::string, std::less<>> keywords;
  std::string line_comment;
  std::string block_comment_open;
  std::string block_comment_close;
  char string_delim = '"';
  char char_delim = '\'';

  // Throws ConfigError when keywords are empty or contain whitespace, or a
  // comment delimiter is empty.
  void validate() const;

  bool is_keyword(std::string_view word) const { return keywords.contains(word); }
};

LanguageProfile java_profile();
LanguageProfile c_profile();

// Reads the JSON profile format:
//   {"name", "keywords": [...], "line_comment", "block_comment_open",
//    "block_comment_close", "string_delim", "char_delim"}
LanguageProfile load_profile(const std::filesystem::path& path);
LanguageProfile parse_profile(std::string_view json_text);

// Name -> profile lookup used to resolve manifest `language` fields.
class ProfileRegistry {
 public:
  // Preloaded with the built-in "java" and "c" profiles.
  ProfileRegistry();

  // Adds or replaces the profile under its own name.
  void add(LanguageProfile profile);

  bool contains(std::string_view name) const;
  const LanguageProfile& get(std::string_view name) const;

  std::set<std::string> names() const;

 private:
  std::map<std::string, LanguageProfile, std::less<>> profiles_;
};

}  // namespace wysiwim::render
