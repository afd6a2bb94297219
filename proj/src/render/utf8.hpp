#pragma once

#include <cstddef>
#include <string_view>

namespace wysiwim::render::detail {

// Length of the sequence introduced by `lead`, or 0 for a byte that cannot
// start a sequence.
constexpr std::size_t sequence_length(unsigned char lead) noexcept {
  if (lead < 0x80) return 1;
  if (lead >= 0xC2 && lead <= 0xDF) return 2;
  if (lead >= 0xE0 && lead <= 0xEF) return 3;
  if (lead >= 0xF0 && lead <= 0xF4) return 4;
  return 0;
}

// Decodes the code point at `pos` of already-validated text and advances pos.
inline char32_t next_code_point(std::string_view text, std::size_t& pos) noexcept {
  const auto lead = static_cast<unsigned char>(text[pos]);
  const std::size_t len = sequence_length(lead);
  char32_t cp = 0;
  switch (len) {
    case 1: cp = lead; break;
    case 2: cp = lead & 0x1FU; break;
    case 3: cp = lead & 0x0FU; break;
    default: cp = lead & 0x07U; break;
  }
  for (std::size_t i = 1; i < len; ++i) {
    cp = (cp << 6) | (static_cast<unsigned char>(text[pos + i]) & 0x3FU);
  }
  pos += len == 0 ? 1 : len;
  return cp;
}

}  // namespace wysiwim::render::detail
