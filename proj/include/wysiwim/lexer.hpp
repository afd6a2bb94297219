#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "wysiwim/profile.hpp"

namespace wysiwim::render {

enum class TokenClass {
  keyword,
  identifier,
  number_literal,
  string_literal,
  char_literal,
  comment,
  punctuation,
  whitespace,
};

inline constexpr std::array<TokenClass, 8> kAllTokenClasses = {
    TokenClass::keyword,        TokenClass::identifier,   TokenClass::number_literal,
    TokenClass::string_literal, TokenClass::char_literal, TokenClass::comment,
    TokenClass::punctuation,    TokenClass::whitespace,
};

std::string_view to_string(TokenClass token_class) noexcept;
std::optional<TokenClass> token_class_from_string(std::string_view name) noexcept;

// Half-open byte range [start, end) of the source.
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  TokenClass token_class = TokenClass::whitespace;

  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

// Throws IngestionError on invalid UTF-8.
void validate_utf8(std::string_view text);

// Single-pass scanner. The returned spans are sorted, disjoint and cover
// every byte of `source`. Whitespace runs are merged into one span; every
// punctuation span is a single code point. Unterminated strings, chars and
// block comments swallow the rest of the source. Throws IngestionError on
// invalid UTF-8.
std::vector<TokenSpan> lex(std::string_view source, const LanguageProfile& profile);

}  // namespace wysiwim::render
