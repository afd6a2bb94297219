#include "wysiwim/render.hpp"

#include <string>

#include "utf8.hpp"
#include "wysiwim/error.hpp"
#include "wysiwim/font.hpp"

namespace wysiwim::render {
namespace {

void draw_glyph(RasterImage& image, const RenderConfig& config, char32_t cp, int col, int row,
                Rgb color) {
  const int x0 = col * config.cell_width;
  const int y0 = row * config.cell_height;
  for (int py = 0; py < config.cell_height; ++py) {
    const int gy = py * kGlyphHeight / config.cell_height;
    const std::uint8_t bits = glyph_row(cp, gy);
    if (bits == 0) continue;
    for (int px = 0; px < config.cell_width; ++px) {
      const int gx = px * kGlyphWidth / config.cell_width;
      if ((bits >> gx) & 1U) {
        image.set_pixel(x0 + px, y0 + py, color);
      }
    }
  }
}

Rgb glyph_color(const RenderConfig& config, TokenClass cls) {
  switch (config.variant) {
    case Variant::plain:
      return config.foreground;
    case Variant::keyword_color:
      return cls == TokenClass::keyword ? config.palette.at(TokenClass::keyword)
                                        : config.foreground;
    case Variant::syntax_color:
      return config.palette.at(cls);
  }
  return config.foreground;
}

}  // namespace

std::string_view to_string(Variant variant) noexcept {
  switch (variant) {
    case Variant::plain: return "plain";
    case Variant::keyword_color: return "keyword";
    case Variant::syntax_color: return "syntax";
  }
  return "plain";
}

std::optional<Variant> variant_from_string(std::string_view name) noexcept {
  if (name == "plain") return Variant::plain;
  if (name == "keyword" || name == "keyword-color") return Variant::keyword_color;
  if (name == "syntax" || name == "syntax-color") return Variant::syntax_color;
  return std::nullopt;
}

Palette default_palette() {
  return {
      {TokenClass::keyword, {200, 0, 0}},
      {TokenClass::identifier, {0, 0, 0}},
      {TokenClass::number_literal, {0, 0, 200}},
      {TokenClass::string_literal, {0, 128, 0}},
      {TokenClass::char_literal, {0, 128, 0}},
      {TokenClass::comment, {128, 128, 128}},
      {TokenClass::punctuation, {0, 0, 0}},
      {TokenClass::whitespace, {0, 0, 0}},
  };
}

void RenderConfig::validate() const {
  if (cell_width <= 0 || cell_height <= 0) {
    throw ConfigError("glyph cell dimensions must be positive");
  }
  if (canvas_width < cell_width || canvas_height < cell_height) {
    throw ConfigError("canvas " + std::to_string(canvas_width) + "x" +
                      std::to_string(canvas_height) + " is smaller than one glyph cell " +
                      std::to_string(cell_width) + "x" + std::to_string(cell_height));
  }
  if (tab_width <= 0) {
    throw ConfigError("tab width must be positive");
  }
  if (variant != Variant::plain) {
    for (TokenClass cls : kAllTokenClasses) {
      if (!palette.contains(cls)) {
        throw ConfigError("palette has no color for token class " + std::string(to_string(cls)));
      }
    }
  }
}

RasterImage render(std::string_view source, const LanguageProfile& profile,
                   const RenderConfig& config) {
  config.validate();
  const auto spans = lex(source, profile);

  RasterImage image(config.canvas_width, config.canvas_height, config.background);
  const int columns = config.columns();
  const int rows = config.rows();
  int col = 0;
  int row = 0;

  for (const TokenSpan& span : spans) {
    const Rgb color = glyph_color(config, span.token_class);
    std::size_t pos = span.start;
    while (pos < span.end) {
      const char32_t cp = detail::next_code_point(source, pos);
      if (cp == U'\r' && pos < source.size() && source[pos] == '\n') {
        continue;
      }
      if (cp == U'\n' || cp == U'\r') {
        ++row;
        col = 0;
        if (row >= rows) return image;
        continue;
      }
      if (cp == U'\t') {
        col = (col / config.tab_width + 1) * config.tab_width;
        continue;
      }
      if (col >= columns) {
        ++row;
        col = 0;
        if (row >= rows) return image;
      }
      if (cp != U' ' && cp != U'\v' && cp != U'\f') {
        draw_glyph(image, config, cp, col, row, color);
      }
      ++col;
    }
  }
  return image;
}

}  // namespace wysiwim::render
