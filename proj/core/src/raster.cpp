// SPDX-License-Identifier: Apache-2.0

#include "anchornav/raster.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace anchornav {

Image::Image(int width, int height, Rgb fill)
    : width_(width),
      height_(height),
      data_(static_cast<size_t>(width) * static_cast<size_t>(height) * 3) {
  for (size_t i = 0; i + 2 < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

void Image::set(int x, int y, Rgb c) {
  if (x < 0 || x >= width_ || y < 0 || y >= height_) return;
  const size_t i =
      (static_cast<size_t>(y) * static_cast<size_t>(width_) + x) * 3;
  data_[i] = c.r;
  data_[i + 1] = c.g;
  data_[i + 2] = c.b;
}

Rgb Image::at(int x, int y) const {
  const size_t i =
      (static_cast<size_t>(y) * static_cast<size_t>(width_) + x) * 3;
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void draw_line(Image& img, Vec2 a, Vec2 b, Rgb color) {
  int x0 = static_cast<int>(std::lround(a.x));
  int y0 = static_cast<int>(std::lround(a.y));
  const int x1 = static_cast<int>(std::lround(b.x));
  const int y1 = static_cast<int>(std::lround(b.y));
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    img.set(x0, y0, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void draw_disc(Image& img, Vec2 center, int radius, Rgb color) {
  const int cx = static_cast<int>(std::lround(center.x));
  const int cy = static_cast<int>(std::lround(center.y));
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) {
        img.set(cx + dx, cy + dy, color);
      }
    }
  }
}

void draw_square(Image& img, Vec2 center, int half, Rgb color) {
  const int cx = static_cast<int>(std::lround(center.x));
  const int cy = static_cast<int>(std::lround(center.y));
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      img.set(cx + dx, cy + dy, color);
    }
  }
}

namespace {

// 3x5 digit glyphs, row-major bits.
constexpr uint16_t kDigits[10] = {
    0b111101101101111,  // 0
    0b010110010010111,  // 1
    0b111001111100111,  // 2
    0b111001111001111,  // 3
    0b101101111001001,  // 4
    0b111100111001111,  // 5
    0b111100111101111,  // 6
    0b111001001001001,  // 7
    0b111101111101111,  // 8
    0b111101111001111,  // 9
};

void draw_digit(Image& img, int digit, int x, int y, Rgb color, int scale) {
  const uint16_t glyph = kDigits[digit];
  for (int row = 0; row < 5; ++row) {
    for (int col = 0; col < 3; ++col) {
      const int bit = 14 - (row * 3 + col);
      if (!((glyph >> bit) & 1)) continue;
      for (int sy = 0; sy < scale; ++sy) {
        for (int sx = 0; sx < scale; ++sx) {
          img.set(x + col * scale + sx, y + row * scale + sy, color);
        }
      }
    }
  }
}

}  // namespace

void draw_number(Image& img, int value, Vec2 top_left, Rgb color, int scale) {
  std::string digits = std::to_string(std::max(0, value));
  int x = static_cast<int>(std::lround(top_left.x));
  const int y = static_cast<int>(std::lround(top_left.y));
  for (char ch : digits) {
    draw_digit(img, ch - '0', x, y, color, scale);
    x += 4 * scale;
  }
}

Image annotate_frame(const AnnotatedObservation& obs) {
  Image img(obs.frame_width, obs.frame_height);
  for (const Anchor& a : obs.anchors) {
    switch (a.kind) {
      case AnchorKind::Frontier: {
        if (!a.has_polyline) break;
        for (size_t i = 0; i < 4; ++i) {
          draw_line(img, a.polyline[i], a.polyline[(i + 1) % 4],
                    colors::kCyan);
        }
        Vec2 label{(a.polyline[0].x + a.polyline[2].x) / 2.0 - 3.0,
                   (a.polyline[0].y + a.polyline[2].y) / 2.0 - 5.0};
        draw_number(img, a.index, label, colors::kGreen);
        break;
      }
      case AnchorKind::Target: {
        if (!a.pixel) break;
        draw_disc(img, *a.pixel, 5, colors::kRed);
        draw_number(img, a.index, {a.pixel->x + 7.0, a.pixel->y - 5.0},
                    colors::kGreen);
        break;
      }
      case AnchorKind::InterLayer: {
        if (!a.pixel) break;
        draw_square(img, *a.pixel, 5, colors::kBlue);
        draw_number(img, a.index, {a.pixel->x + 7.0, a.pixel->y - 5.0},
                    colors::kGreen);
        break;
      }
    }
  }
  return img;
}

namespace {

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

void put_chunk(std::string& out, const char type[4], const std::string& data) {
  put_u32(out, static_cast<uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  const uLong crc = crc32(
      0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()));
  put_u32(out, static_cast<uint32_t>(crc));
}

}  // namespace

std::string encode_png(const Image& img) {
  std::string out("\x89PNG\r\n\x1a\n", 8);

  std::string ihdr;
  put_u32(ihdr, static_cast<uint32_t>(img.width()));
  put_u32(ihdr, static_cast<uint32_t>(img.height()));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  put_chunk(out, "IHDR", ihdr);

  // Filter byte 0 per scanline.
  const size_t stride = static_cast<size_t>(img.width()) * 3;
  std::string raw;
  raw.reserve((stride + 1) * static_cast<size_t>(img.height()));
  for (int y = 0; y < img.height(); ++y) {
    raw.push_back(0);
    raw.append(reinterpret_cast<const char*>(img.data().data()) +
                   static_cast<size_t>(y) * stride,
               stride);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string compressed(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw std::runtime_error("encode_png: deflate failed");
  }
  compressed.resize(bound);
  put_chunk(out, "IDAT", compressed);
  put_chunk(out, "IEND", "");
  return out;
}

std::string base64_encode(const std::string& bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 2 < bytes.size()) {
    const uint32_t n = (static_cast<uint8_t>(bytes[i]) << 16) |
                       (static_cast<uint8_t>(bytes[i + 1]) << 8) |
                       static_cast<uint8_t>(bytes[i + 2]);
    out.push_back(kAlphabet[(n >> 18) & 63]);
    out.push_back(kAlphabet[(n >> 12) & 63]);
    out.push_back(kAlphabet[(n >> 6) & 63]);
    out.push_back(kAlphabet[n & 63]);
    i += 3;
  }
  if (i + 1 == bytes.size()) {
    const uint32_t n = static_cast<uint8_t>(bytes[i]) << 16;
    out.push_back(kAlphabet[(n >> 18) & 63]);
    out.push_back(kAlphabet[(n >> 12) & 63]);
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const uint32_t n = (static_cast<uint8_t>(bytes[i]) << 16) |
                       (static_cast<uint8_t>(bytes[i + 1]) << 8);
    out.push_back(kAlphabet[(n >> 18) & 63]);
    out.push_back(kAlphabet[(n >> 12) & 63]);
    out.push_back(kAlphabet[(n >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

}  // namespace anchornav
