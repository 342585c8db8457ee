#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sltk {

enum class Status {
  ok = 0,
  invalid_argument,
  bad_dimensions,
  out_of_bounds,
  inner_on_edge,
  all_zero_image,
  nonmonotonic_timestamp,
  parse_error,
  io_error,
  unknown_key,
  bad_state,
};

const char* status_name(Status s);

/// Exception carrying a Status so the C API can map failures to error codes.
class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  Status status() const { return status_; }

 private:
  Status status_;
};

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point& a, const Point& b) {
    return a.x == b.x && a.y == b.y;
  }
  friend bool operator!=(const Point& a, const Point& b) { return !(a == b); }
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

/// Round-half-up division for nonnegative operands. All image-space rounding
/// in this library goes through here so it stays consistent.
inline std::int64_t round_div(std::int64_t num, std::int64_t den) {
  return (2 * num + den) / (2 * den);
}

/// splitmix64: tiny, portable, and identical on every platform. Used wherever
/// a fixed seed must reproduce byte-identical output (blur kernel layout,
/// scene noise, test fixtures).
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  /// Uniform in [lo, hi] inclusive.
  int range(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
};

}  // namespace sltk
