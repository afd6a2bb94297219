#include "wysiwim/lexer.hpp"

#include <string>

#include "utf8.hpp"
#include "wysiwim/error.hpp"

namespace wysiwim::render {
namespace {

constexpr std::array<std::string_view, 8> kClassNames = {
    "keyword", "identifier", "number-literal", "string-literal",
    "char-literal", "comment", "punctuation", "whitespace",
};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

// End of a delimited literal opened at `pos`; the whole remainder when the
// closing delimiter never appears.
std::size_t scan_quoted(std::string_view src, std::size_t pos, char delim) {
  std::size_t i = pos + 1;
  while (i < src.size()) {
    if (src[i] == '\\') {
      i += 2;
    } else if (src[i] == delim) {
      return i + 1;
    } else {
      ++i;
    }
  }
  return src.size();
}

}  // namespace

std::string_view to_string(TokenClass token_class) noexcept {
  return kClassNames[static_cast<std::size_t>(token_class)];
}

std::optional<TokenClass> token_class_from_string(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) {
      return kAllTokenClasses[i];
    }
  }
  return std::nullopt;
}

void validate_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    const std::size_t len = detail::sequence_length(lead);
    bool ok = len != 0 && i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      ok = (static_cast<unsigned char>(text[i + k]) & 0xC0U) == 0x80U;
    }
    if (ok && len >= 3) {
      // Reject overlong forms, UTF-16 surrogates and code points past U+10FFFF.
      const auto second = static_cast<unsigned char>(text[i + 1]);
      if ((lead == 0xE0 && second < 0xA0) || (lead == 0xED && second > 0x9F) ||
          (lead == 0xF0 && second < 0x90) || (lead == 0xF4 && second > 0x8F)) {
        ok = false;
      }
    }
    if (!ok) {
      throw IngestionError("invalid UTF-8 at byte offset " + std::to_string(i));
    }
    i += len;
  }
}

std::vector<TokenSpan> lex(std::string_view source, const LanguageProfile& profile) {
  validate_utf8(source);

  std::vector<TokenSpan> spans;
  const std::size_t n = source.size();
  std::size_t pos = 0;
  auto emit = [&](std::size_t end, TokenClass cls) {
    spans.push_back(TokenSpan{pos, end, cls});
    pos = end;
  };

  while (pos < n) {
    const std::string_view rest = source.substr(pos);
    const char c = source[pos];

    if (rest.starts_with(profile.line_comment)) {
      const std::size_t eol = source.find('\n', pos);
      emit(eol == std::string_view::npos ? n : eol, TokenClass::comment);
    } else if (rest.starts_with(profile.block_comment_open)) {
      const std::size_t close =
          source.find(profile.block_comment_close, pos + profile.block_comment_open.size());
      emit(close == std::string_view::npos ? n : close + profile.block_comment_close.size(),
           TokenClass::comment);
    } else if (c == profile.string_delim) {
      emit(scan_quoted(source, pos, profile.string_delim), TokenClass::string_literal);
    } else if (c == profile.char_delim) {
      emit(scan_quoted(source, pos, profile.char_delim), TokenClass::char_literal);
    } else if (is_space(c)) {
      std::size_t end = pos + 1;
      while (end < n && is_space(source[end])) ++end;
      emit(end, TokenClass::whitespace);
    } else if (is_ident_start(c)) {
      std::size_t end = pos + 1;
      while (end < n && is_ident_char(source[end])) ++end;
      const bool kw = profile.is_keyword(source.substr(pos, end - pos));
      emit(end, kw ? TokenClass::keyword : TokenClass::identifier);
    } else if (is_digit(c)) {
      std::size_t end = pos + 1;
      while (end < n && is_digit(source[end])) ++end;
      if (end + 1 < n && source[end] == '.' && is_digit(source[end + 1])) {
        end += 2;
        while (end < n && is_digit(source[end])) ++end;
      }
      emit(end, TokenClass::number_literal);
    } else {
      std::size_t end = pos;
      detail::next_code_point(source, end);
      emit(end, TokenClass::punctuation);
    }
  }
  return spans;
}

}  // namespace wysiwim::render
