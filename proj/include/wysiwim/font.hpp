#pragma once

#include <cstdint>

namespace wysiwim::render {

// Embedded 8x16 monospace bitmap font covering printable ASCII. Every other
// code point maps to a single replacement glyph.
inline constexpr int kGlyphWidth = 8;
inline constexpr int kGlyphHeight = 16;

bool has_glyph(char32_t code_point) noexcept;

// Row bitmask of a glyph; bit 0 is the leftmost column.
std::uint8_t glyph_row(char32_t code_point, int row) noexcept;

bool glyph_pixel(char32_t code_point, int x, int y) noexcept;

}  // namespace wysiwim::render
