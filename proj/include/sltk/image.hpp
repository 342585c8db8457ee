#pragma once

#include <cstdint>
#include <vector>

#include "sltk/types.hpp"

namespace sltk {

/// Interleaved 8-bit RGB raster with a monotonic capture timestamp.
struct Frame {
  int width = 0;
  int height = 0;
  std::int64_t timestamp_ms = 0;
  std::vector<std::uint8_t> rgb;  // width*height*3, row-major

  Frame() = default;
  Frame(int w, int h, std::int64_t t = 0)
      : width(w), height(h), timestamp_ms(t), rgb(static_cast<size_t>(w) * h * 3, 0) {}

  static Frame solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b,
                     std::int64_t t = 0);

  std::uint8_t* px(int x, int y) { return rgb.data() + (static_cast<size_t>(y) * width + x) * 3; }
  const std::uint8_t* px(int x, int y) const {
    return rgb.data() + (static_cast<size_t>(y) * width + x) * 3;
  }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    std::uint8_t* p = px(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
  bool in_bounds(Point p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
  }
  bool same_size(const Frame& o) const { return width == o.width && height == o.height; }
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  GrayImage() = default;
  GrayImage(int w, int h) : width(w), height(h), values(static_cast<size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
};

/// Sobel gradient magnitudes. A pixel is an edge iff its magnitude is
/// strictly above the threshold; edges are what stop cast rays.
struct EdgeImage {
  int width = 0;
  int height = 0;
  int threshold = 128;
  std::vector<std::uint8_t> magnitudes;

  EdgeImage() = default;
  EdgeImage(int w, int h, int thr = 128)
      : width(w), height(h), threshold(thr), magnitudes(static_cast<size_t>(w) * h, 0) {}

  std::uint8_t magnitude(int x, int y) const {
    return magnitudes[static_cast<size_t>(y) * width + x];
  }
  std::uint8_t& magnitude(int x, int y) {
    return magnitudes[static_cast<size_t>(y) * width + x];
  }
  bool is_edge(int x, int y) const { return magnitude(x, y) > threshold; }
  bool is_edge(Point p) const { return is_edge(p.x, p.y); }
  bool in_bounds(Point p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
  }
};

/// Brightness-compensated absolute inter-frame difference. Values are already
/// floored at zero after subtracting the compensation.
struct DiffImage {
  int width = 0;
  int height = 0;
  int compensation = 0;
  std::vector<std::uint8_t> values;

  DiffImage() = default;
  DiffImage(int w, int h) : width(w), height(h), values(static_cast<size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
};

}  // namespace sltk
