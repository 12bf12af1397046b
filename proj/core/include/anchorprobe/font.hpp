#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace anchorprobe::font {

// Embedded monospaced bitmap font: each glyph occupies a 5 × 10 cell (row 0
// blank, rows 1-7 cap height, rows 8-9 descenders) and advances 6 columns.
inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 10;
inline constexpr int kAdvance = 6;

/// Row bitmasks for `c`, bit 4 = leftmost column. Characters without a glyph
/// map to the '?' glyph.
const std::array<std::uint8_t, kGlyphHeight>& glyph(char c);

bool has_glyph(char c);

/// Rendered text extent at a given pixel height (nearest-neighbour scaling).
struct TextExtent {
  int width = 0;
  int height = 0;
};
TextExtent measure(std::string_view text, int text_height);

/// Whether the scaled pixel (px, py) of the text block is ink. Coordinates are
/// relative to the text block's top-left corner.
bool ink_at(std::string_view text, int text_height, int px, int py);

}  // namespace anchorprobe::font
