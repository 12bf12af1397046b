#include "anchorprobe/font.hpp"

#include <string_view>

#include "anchorprobe/error.hpp"

namespace anchorprobe::font {

namespace {

using Glyph = std::array<std::uint8_t, kGlyphHeight>;

// Each glyph drawn as ten 5-column rows.
struct GlyphArt {
  char c;
  std::string_view rows[kGlyphHeight];
};

constexpr GlyphArt kArt[] = {
    {' ', {".....", ".....", ".....", ".....", ".....", ".....", ".....", ".....", ".....", "....."}},
    {'?', {".....", ".###.", "#...#", "....#", "...#.", "..#..", ".....", "..#..", ".....", "....."}},
    {':', {".....", ".....", ".....", "..#..", ".....", ".....", "..#..", ".....", ".....", "....."}},
    {'/', {".....", "....#", "....#", "...#.", "..#..", ".#...", "#....", "#....", ".....", "....."}},
    {'.', {".....", ".....", ".....", ".....", ".....", ".....", ".....", "..#..", ".....", "....."}},
    {'-', {".....", ".....", ".....", ".....", "#####", ".....", ".....", ".....", ".....", "....."}},
    {'0', {".....", ".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###.", ".....", "....."}},
    {'1', {".....", "..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###.", ".....", "....."}},
    {'2', {".....", ".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####", ".....", "....."}},
    {'3', {".....", "#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###.", ".....", "....."}},
    {'4', {".....", "...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#.", ".....", "....."}},
    {'5', {".....", "#####", "#....", "####.", "....#", "....#", "#...#", ".###.", ".....", "....."}},
    {'6', {".....", "..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###.", ".....", "....."}},
    {'7', {".....", "#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#...", ".....", "....."}},
    {'8', {".....", ".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###.", ".....", "....."}},
    {'9', {".....", ".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##..", ".....", "....."}},
    {'A', {".....", ".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#", ".....", "....."}},
    {'B', {".....", "####.", "#...#", "#...#", "####.", "#...#", "#...#", "####.", ".....", "....."}},
    {'C', {".....", ".###.", "#...#", "#....", "#....", "#....", "#...#", ".###.", ".....", "....."}},
    {'D', {".....", "###..", "#..#.", "#...#", "#...#", "#...#", "#..#.", "###..", ".....", "....."}},
    {'E', {".....", "#####", "#....", "#....", "####.", "#....", "#....", "#####", ".....", "....."}},
    {'F', {".....", "#####", "#....", "#....", "####.", "#....", "#....", "#....", ".....", "....."}},
    {'G', {".....", ".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####", ".....", "....."}},
    {'H', {".....", "#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#", ".....", "....."}},
    {'I', {".....", ".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###.", ".....", "....."}},
    {'J', {".....", "..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##..", ".....", "....."}},
    {'K', {".....", "#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#", ".....", "....."}},
    {'L', {".....", "#....", "#....", "#....", "#....", "#....", "#....", "#####", ".....", "....."}},
    {'M', {".....", "#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#", ".....", "....."}},
    {'N', {".....", "#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", ".....", "....."}},
    {'O', {".....", ".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###.", ".....", "....."}},
    {'P', {".....", "####.", "#...#", "#...#", "####.", "#....", "#....", "#....", ".....", "....."}},
    {'Q', {".....", ".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#", ".....", "....."}},
    {'R', {".....", "####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#", ".....", "....."}},
    {'S', {".....", ".####", "#....", "#....", ".###.", "....#", "....#", "####.", ".....", "....."}},
    {'T', {".....", "#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#..", ".....", "....."}},
    {'U', {".....", "#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###.", ".....", "....."}},
    {'V', {".....", "#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#..", ".....", "....."}},
    {'W', {".....", "#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#.", ".....", "....."}},
    {'X', {".....", "#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#", ".....", "....."}},
    {'Y', {".....", "#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#..", ".....", "....."}},
    {'Z', {".....", "#####", "....#", "...#.", "..#..", ".#...", "#....", "#####", ".....", "....."}},
    {'a', {".....", ".....", ".....", ".###.", "....#", ".####", "#...#", ".####", ".....", "....."}},
    {'b', {".....", "#....", "#....", "#.##.", "##..#", "#...#", "#...#", "####.", ".....", "....."}},
    {'c', {".....", ".....", ".....", ".###.", "#....", "#....", "#...#", ".###.", ".....", "....."}},
    {'d', {".....", "....#", "....#", ".##.#", "#..##", "#...#", "#...#", ".####", ".....", "....."}},
    {'e', {".....", ".....", ".....", ".###.", "#...#", "#####", "#....", ".###.", ".....", "....."}},
    {'f', {".....", "..##.", ".#..#", ".#...", "###..", ".#...", ".#...", ".#...", ".....", "....."}},
    {'g', {".....", ".....", ".....", ".####", "#...#", "#...#", ".####", "....#", "....#", ".###."}},
    {'h', {".....", "#....", "#....", "#.##.", "##..#", "#...#", "#...#", "#...#", ".....", "....."}},
    {'i', {".....", "..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###.", ".....", "....."}},
    {'j', {".....", "...#.", ".....", "..##.", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."}},
    {'k', {".....", "#....", "#....", "#..#.", "#.#..", "##...", "#.#..", "#..#.", ".....", "....."}},
    {'l', {".....", ".##..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###.", ".....", "....."}},
    {'m', {".....", ".....", ".....", "##.#.", "#.#.#", "#.#.#", "#...#", "#...#", ".....", "....."}},
    {'n', {".....", ".....", ".....", "#.##.", "##..#", "#...#", "#...#", "#...#", ".....", "....."}},
    {'o', {".....", ".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###.", ".....", "....."}},
    {'p', {".....", ".....", ".....", "####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
    {'q', {".....", ".....", ".....", ".####", "#...#", "#...#", ".####", "....#", "....#", "....#"}},
    {'r', {".....", ".....", ".....", "#.##.", "##..#", "#....", "#....", "#....", ".....", "....."}},
    {'s', {".....", ".....", ".....", ".###.", "#....", ".###.", "....#", "####.", ".....", "....."}},
    {'t', {".....", ".#...", ".#...", "###..", ".#...", ".#...", ".#..#", "..##.", ".....", "....."}},
    {'u', {".....", ".....", ".....", "#...#", "#...#", "#...#", "#..##", ".##.#", ".....", "....."}},
    {'v', {".....", ".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#..", ".....", "....."}},
    {'w', {".....", ".....", ".....", "#...#", "#...#", "#.#.#", "#.#.#", ".#.#.", ".....", "....."}},
    {'x', {".....", ".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", ".....", "....."}},
    {'y', {".....", ".....", ".....", "#...#", "#...#", "#...#", ".####", "....#", "....#", ".###."}},
    {'z', {".....", ".....", ".....", "#####", "...#.", "..#..", ".#...", "#####", ".....", "....."}},
};

struct GlyphTable {
  std::array<Glyph, 128> glyphs{};
  std::array<bool, 128> present{};

  GlyphTable() {
    for (const auto& art : kArt) {
      Glyph g{};
      for (int r = 0; r < kGlyphHeight; ++r) {
        std::uint8_t bits = 0;
        for (int c = 0; c < kGlyphWidth; ++c) {
          if (art.rows[r][c] == '#') bits |= static_cast<std::uint8_t>(1u << (kGlyphWidth - 1 - c));
        }
        g[r] = bits;
      }
      glyphs[static_cast<unsigned char>(art.c)] = g;
      present[static_cast<unsigned char>(art.c)] = true;
    }
  }
};

const GlyphTable& table() {
  static const GlyphTable t;
  return t;
}

}  // namespace

bool has_glyph(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 128 && table().present[u];
}

const std::array<std::uint8_t, kGlyphHeight>& glyph(char c) {
  const auto u = static_cast<unsigned char>(c);
  return has_glyph(c) ? table().glyphs[u] : table().glyphs[static_cast<unsigned char>('?')];
}

TextExtent measure(std::string_view text, int text_height) {
  if (text_height < kGlyphHeight) {
    throw DomainError("text height must be at least " + std::to_string(kGlyphHeight) + " px");
  }
  // Advance scaled with integer arithmetic so widths are exact on every platform.
  const int advance = kAdvance * text_height / kGlyphHeight;
  return {static_cast<int>(text.size()) * advance, text_height};
}

bool ink_at(std::string_view text, int text_height, int px, int py) {
  const int advance = kAdvance * text_height / kGlyphHeight;
  if (px < 0 || py < 0 || py >= text_height) return false;
  const int index = px / advance;
  if (index >= static_cast<int>(text.size())) return false;
  // Nearest-neighbour source cell.
  const int gx = (px - index * advance) * kGlyphHeight / text_height;
  const int gy = py * kGlyphHeight / text_height;
  if (gx >= kGlyphWidth) return false;
  return (glyph(text[static_cast<std::size_t>(index)])[gy] >> (kGlyphWidth - 1 - gx)) & 1u;
}

}  // namespace anchorprobe::font
