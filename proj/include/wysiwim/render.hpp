#pragma once

#include <map>
#include <optional>
#include <string_view>

#include "wysiwim/image.hpp"
#include "wysiwim/lexer.hpp"
#include "wysiwim/profile.hpp"

namespace wysiwim::render {

enum class Variant {
  plain,          // every glyph in the foreground color
  keyword_color,  // keywords from the palette, everything else foreground
  syntax_color,   // palette color per token class
};

std::string_view to_string(Variant variant) noexcept;
// Accepts "plain", "keyword", "keyword-color", "syntax", "syntax-color".
std::optional<Variant> variant_from_string(std::string_view name) noexcept;

using Palette = std::map<TokenClass, Rgb>;

Palette default_palette();

struct RenderConfig {
  int canvas_width = 224;
  int canvas_height = 224;
  int cell_width = 8;
  int cell_height = 16;
  int tab_width = 4;
  Variant variant = Variant::plain;
  Palette palette = default_palette();
  Rgb background{255, 255, 255};
  Rgb foreground{0, 0, 0};

  // Throws ConfigError on a violated invariant.
  void validate() const;

  int columns() const noexcept { return canvas_width / cell_width; }
  int rows() const noexcept { return canvas_height / cell_height; }
};

// Lays the source out on a fixed character grid and draws it with the
// embedded font, scaled nearest-neighbour into the configured cell size.
// Lines wrap at the last column, tabs advance to the next tab stop and rows
// past the bottom of the canvas are dropped. Throws ConfigError for an
// invalid config and IngestionError for invalid UTF-8.
RasterImage render(std::string_view source, const LanguageProfile& profile,
                   const RenderConfig& config);

}  // namespace wysiwim::render
