// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anchornav/anchors.hpp"

namespace anchornav {

struct Rgb {
  uint8_t r = 0;
  uint8_t g = 0;
  uint8_t b = 0;
};

namespace colors {
inline constexpr Rgb kBackground{24, 24, 24};
inline constexpr Rgb kCyan{0, 255, 255};
inline constexpr Rgb kGreen{0, 255, 0};
inline constexpr Rgb kRed{255, 0, 0};
inline constexpr Rgb kBlue{40, 90, 255};
}  // namespace colors

/// Dense RGB8 raster.
class Image {
 public:
  Image(int width, int height, Rgb fill = colors::kBackground);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<uint8_t>& data() const { return data_; }

  void set(int x, int y, Rgb c);
  Rgb at(int x, int y) const;

 private:
  int width_;
  int height_;
  std::vector<uint8_t> data_;
};

void draw_line(Image& img, Vec2 a, Vec2 b, Rgb color);
void draw_disc(Image& img, Vec2 center, int radius, Rgb color);
void draw_square(Image& img, Vec2 center, int half, Rgb color);
/// 3x5 bitmap digits, scaled; value rendered in decimal.
void draw_number(Image& img, int value, Vec2 top_left, Rgb color,
                 int scale = 2);

/// Deterministic rasterization of one frame: cyan frontier rectangles, red
/// target discs, blue inter-layer squares, green index labels. Identical
/// observations produce byte-identical images.
Image annotate_frame(const AnnotatedObservation& obs);

/// Encode as an 8-bit RGB PNG (fixed zlib settings, deterministic).
std::string encode_png(const Image& img);

std::string base64_encode(const std::string& bytes);

}  // namespace anchornav
