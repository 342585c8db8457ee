#include "sltk/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sltk/types.hpp"

namespace sltk {

std::int64_t Mask::area() const {
  std::int64_t n = 0;
  for (std::uint8_t b : bits) n += b;
  return n;
}

Vec2 Mask::centroid() const {
  std::int64_t n = 0, sx = 0, sy = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (at(x, y)) {
        ++n;
        sx += x;
        sy += y;
      }
  if (n == 0) return Vec2{0.0, 0.0};
  return Vec2{static_cast<double>(sx) / n, static_cast<double>(sy) / n};
}

RegionStats flood_fill_oracle(const EdgeImage& edges, Point inner) {
  if (!edges.in_bounds(inner))
    throw Error(Status::out_of_bounds, "inner point outside the edge image");
  if (edges.is_edge(inner))
    throw Error(Status::inner_on_edge, "flood fill seeded on an edge pixel");

  RegionStats stats;
  stats.mask = Mask(edges.width, edges.height);
  std::vector<Point> stack = {inner};
  stats.mask.set(inner.x, inner.y, true);
  std::int64_t n = 0, sx = 0, sy = 0;

  while (!stack.empty()) {
    const Point p = stack.back();
    stack.pop_back();
    ++n;
    sx += p.x;
    sy += p.y;
    const Point neighbors[4] = {{p.x, p.y - 1}, {p.x + 1, p.y}, {p.x, p.y + 1}, {p.x - 1, p.y}};
    for (const Point& q : neighbors) {
      if (!edges.in_bounds(q) || edges.is_edge(q) || stats.mask.at(q.x, q.y)) continue;
      stats.mask.set(q.x, q.y, true);
      stack.push_back(q);
    }
  }
  stats.area = n;
  stats.centroid = Vec2{static_cast<double>(sx) / n, static_cast<double>(sy) / n};
  return stats;
}

EdgeImage mask_to_edges(const Mask& mask, int threshold) {
  EdgeImage edges(mask.width, mask.height, threshold);
  auto inside = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < mask.width && y < mask.height && mask.at(x, y);
  };
  // Both sides of the boundary, using the full 8-neighborhood: every non-mask
  // pixel 8-adjacent to the mask is an edge, so an 8-connected ray leaving the
  // region must land on the band; there are no diagonal cracks.
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const bool m = mask.at(x, y);
      bool boundary = false;
      for (int dy = -1; dy <= 1 && !boundary; ++dy)
        for (int dx = -1; dx <= 1 && !boundary; ++dx)
          if ((dx || dy) && inside(x + dx, y + dy) != m) boundary = true;
      if (boundary) edges.magnitude(x, y) = 255;
    }
  }
  return edges;
}

namespace {

double segment_distance_sq(double px, double py, double ax, double ay, double bx,
                           double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len_sq = vx * vx + vy * vy;
  double t = len_sq > 0 ? ((px - ax) * vx + (py - ay) * vy) / len_sq : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
  return dx * dx + dy * dy;
}

// Hand silhouette in local units: palm rectangle, four finger capsules off
// the palm top, thumb capsule off the left side. Non-convex with five lobes.
struct Capsule {
  double ax, ay, bx, by, r;
};
constexpr Capsule kFingers[5] = {
    {-24.0, -8.0, -24.0, -28.5, 5.5},  // index
    {-8.0, -8.0, -8.0, -34.5, 5.5},    // middle
    {8.0, -8.0, 8.0, -31.5, 5.5},      // ring
    {24.0, -8.0, 24.0, -21.5, 5.5},    // pinky
    {-30.0, 14.0, -47.0, 0.0, 6.5},    // thumb
};
constexpr double kPalm[4] = {-30.0, -8.0, 30.0, 42.0};  // x0,y0,x1,y1

bool hand_contains_local(double x, double y) {
  if (x >= kPalm[0] && x <= kPalm[2] && y >= kPalm[1] && y <= kPalm[3]) return true;
  for (const Capsule& c : kFingers)
    if (segment_distance_sq(x, y, c.ax, c.ay, c.bx, c.by) <= c.r * c.r) return true;
  return false;
}

// Local-space seed points, one per lobe (index..pinky, thumb).
constexpr double kFingerSeeds[5][2] = {
    {-24.0, -20.0}, {-8.0, -24.0}, {8.0, -22.0}, {24.0, -16.0}, {-38.0, 7.0}};

template <typename Contains>
Mask rasterize(int width, int height, Contains&& contains) {
  Mask m(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (contains(static_cast<double>(x), static_cast<double>(y))) m.set(x, y, true);
  return m;
}

}  // namespace

Mask disk_mask(int width, int height, double cx, double cy, double radius) {
  return rasterize(width, height, [&](double x, double y) {
    const double dx = x - cx, dy = y - cy;
    return dx * dx + dy * dy <= radius * radius;
  });
}

Mask square_mask(int width, int height, double cx, double cy, double side) {
  const double h = side / 2.0;
  return rasterize(width, height, [&](double x, double y) {
    return std::abs(x - cx) <= h && std::abs(y - cy) <= h;
  });
}

Mask hand_mask(int width, int height, double cx, double cy, double scale) {
  return rasterize(width, height, [&](double x, double y) {
    return hand_contains_local((x - cx) / scale, (y - cy) / scale);
  });
}

std::vector<Point> hand_finger_points(double cx, double cy, double scale) {
  std::vector<Point> pts;
  for (const auto& s : kFingerSeeds)
    pts.push_back(Point{static_cast<int>(std::llround(cx + s[0] * scale)),
                        static_cast<int>(std::llround(cy + s[1] * scale))});
  return pts;
}

// ---- script parsing ----------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw Error(Status::parse_error,
              "scene script line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> tokenize(const std::string& value) {
  std::string normalized = value;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream in(normalized);
  std::vector<std::string> tokens;
  std::string t;
  while (in >> t) tokens.push_back(t);
  return tokens;
}

double to_num(const std::string& s, int line) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    parse_fail(line, "expected a number, got '" + s + "'");
  }
  if (pos != s.size()) parse_fail(line, "expected a number, got '" + s + "'");
  return v;
}

int to_int(const std::string& s, int line) {
  const double v = to_num(s, line);
  if (v != std::floor(v)) parse_fail(line, "expected an integer, got '" + s + "'");
  return static_cast<int>(v);
}

std::uint8_t to_byte(const std::string& s, int line) {
  const int v = to_int(s, line);
  if (v < 0 || v > 255) parse_fail(line, "channel value out of 0..255: '" + s + "'");
  return static_cast<std::uint8_t>(v);
}

}  // namespace

SceneScript SceneScript::parse(const std::string& text) {
  SceneScript s;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool have_duration = false;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const size_t hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const size_t eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) parse_fail(line_no, "expected key = value");

    auto trim = [](std::string v) {
      const size_t a = v.find_first_not_of(" \t\r");
      const size_t b = v.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::vector<std::string> v = tokenize(trim(line.substr(eq + 1)));
    auto want = [&](size_t n) {
      if (v.size() != n)
        parse_fail(line_no, key + " expects " + std::to_string(n) + " value(s)");
    };

    if (key == "width") { want(1); s.width = to_int(v[0], line_no); }
    else if (key == "height") { want(1); s.height = to_int(v[0], line_no); }
    else if (key == "fps") { want(1); s.fps = to_int(v[0], line_no); }
    else if (key == "duration") { want(1); s.duration = to_int(v[0], line_no); have_duration = true; }
    else if (key == "seed") { want(1); s.seed = static_cast<std::uint64_t>(to_num(v[0], line_no)); }
    else if (key == "background") {
      if (v.empty()) parse_fail(line_no, "background expects a kind");
      if (v[0] == "uniform") {
        want(4);
        for (int i = 0; i < 3; ++i) s.bg_a[i] = s.bg_b[i] = to_byte(v[1 + i], line_no);
        s.background = BackgroundKind::uniform;
      } else if (v[0] == "checker") {
        want(8);
        s.checker_cell = to_int(v[1], line_no);
        if (s.checker_cell < 1) parse_fail(line_no, "checker cell must be >= 1");
        for (int i = 0; i < 3; ++i) s.bg_a[i] = to_byte(v[2 + i], line_no);
        for (int i = 0; i < 3; ++i) s.bg_b[i] = to_byte(v[5 + i], line_no);
        s.background = BackgroundKind::checker;
      } else {
        parse_fail(line_no, "background kind must be uniform or checker");
      }
    } else if (key == "object") {
      want(2);
      if (v[0] == "disk") s.shape = ShapeKind::disk;
      else if (v[0] == "square") s.shape = ShapeKind::square;
      else if (v[0] == "hand") s.shape = ShapeKind::hand;
      else parse_fail(line_no, "object must be disk, square or hand");
      s.shape_size = to_num(v[1], line_no);
    } else if (key == "color") {
      want(3);
      for (int i = 0; i < 3; ++i) s.color[i] = to_byte(v[i], line_no);
    } else if (key == "center") {
      want(2);
      s.start = Vec2{to_num(v[0], line_no), to_num(v[1], line_no)};
    } else if (key == "velocity") {
      want(2);
      s.velocity = Vec2{to_num(v[0], line_no), to_num(v[1], line_no)};
    } else if (key == "segment") {
      want(3);
      s.segments.push_back(Segment{to_int(v[0], line_no),
                                   Vec2{to_num(v[1], line_no), to_num(v[2], line_no)}});
    } else if (key == "jump") {
      want(3);
      s.jumps.push_back(JumpEvent{to_int(v[0], line_no),
                                  Vec2{to_num(v[1], line_no), to_num(v[2], line_no)}});
    } else if (key == "bounce") {
      want(1);
      s.bounce = to_int(v[0], line_no) != 0;
    } else if (key == "size_at") {
      want(2);
      s.size_keys.push_back(SizeKey{to_int(v[0], line_no), to_num(v[1], line_no)});
    } else if (key == "noise") {
      want(1);
      s.noise_amplitude = to_int(v[0], line_no);
    } else if (key == "motion_blur") {
      want(1);
      s.motion_blur = to_int(v[0], line_no);
    } else if (key == "brightness_jump") {
      want(2);
      s.brightness_jumps.push_back(
          BrightnessJump{to_int(v[0], line_no), to_int(v[1], line_no)});
    } else if (key == "occlusion") {
      want(6);
      s.occlusions.push_back(Occlusion{to_int(v[0], line_no), to_int(v[1], line_no),
                                       to_num(v[2], line_no), to_num(v[3], line_no),
                                       to_num(v[4], line_no), to_num(v[5], line_no)});
    } else {
      parse_fail(line_no, "unknown key '" + key + "'");
    }
  }
  if (!have_duration) throw Error(Status::parse_error, "scene script: duration is required");
  s.validate();
  return s;
}

void SceneScript::validate() const {
  if (duration < 1) throw Error(Status::parse_error, "scene duration must be >= 1");
  if (fps < 1 || fps > 1000) throw Error(Status::parse_error, "scene fps must be in 1..1000");
  if (width % 160 != 0 || height % 120 != 0 || width <= 0 || height <= 0)
    throw Error(Status::parse_error,
                "scene capture size must be a multiple of 160x120");
  if (shape_size <= 0) throw Error(Status::parse_error, "object size must be positive");
  for (const SizeKey& k : size_keys)
    if (k.value <= 0) throw Error(Status::parse_error, "object size must stay positive");
  if (noise_amplitude < 0 || noise_amplitude > 64)
    throw Error(Status::parse_error, "noise amplitude must be in 0..64");
  if (motion_blur < 0) throw Error(Status::parse_error, "motion blur must be >= 0");
}

// ---- rendering ----------------------------------------------------------------

Scene::Scene(SceneScript script) : script_(std::move(script)) {
  script_.validate();
}

double Scene::size_at(int frame) const {
  std::vector<SceneScript::SizeKey> keys = script_.size_keys;
  std::sort(keys.begin(), keys.end(),
            [](const auto& a, const auto& b) { return a.frame < b.frame; });
  if (keys.empty() || keys.front().frame > 0)
    keys.insert(keys.begin(), SceneScript::SizeKey{0, script_.shape_size});
  if (frame <= keys.front().frame) return keys.front().value;
  for (size_t i = 1; i < keys.size(); ++i) {
    if (frame <= keys[i].frame) {
      const auto& a = keys[i - 1];
      const auto& b = keys[i];
      const double t = static_cast<double>(frame - a.frame) / (b.frame - a.frame);
      return a.value + t * (b.value - a.value);
    }
  }
  return keys.back().value;
}

Vec2 Scene::center_at(int frame) const {
  // Half extents of the shape, for bounce reflection and bounds checks.
  auto extents = [&](int f) {
    const double s = size_at(f);
    struct { double left, right, up, down; } e{};
    switch (script_.shape) {
      case ShapeKind::disk: e = {s, s, s, s}; break;
      case ShapeKind::square: e = {s / 2, s / 2, s / 2, s / 2}; break;
      case ShapeKind::hand: e = {53.5 * s, 30.0 * s, 45.5 * s, 42.0 * s}; break;
    }
    return e;
  };

  Vec2 pos = script_.start;
  Vec2 vel = script_.velocity;
  for (int i = 1; i <= frame; ++i) {
    for (const auto& seg : script_.segments)
      if (seg.frame == i) vel = seg.velocity;
    Vec2 next{pos.x + vel.x, pos.y + vel.y};
    for (const auto& jump : script_.jumps)
      if (jump.frame == i) {
        next.x += jump.offset.x;
        next.y += jump.offset.y;
      }
    if (script_.bounce) {
      const auto e = extents(i);
      if (next.x - e.left < 1.0 || next.x + e.right > sub_w_ - 2.0) {
        vel.x = -vel.x;
        next.x = pos.x + vel.x;
      }
      if (next.y - e.up < 1.0 || next.y + e.down > sub_h_ - 2.0) {
        vel.y = -vel.y;
        next.y = pos.y + vel.y;
      }
    }
    pos = next;
  }

  const auto e = extents(frame);
  if (pos.x - e.left < 0.0 || pos.x + e.right > sub_w_ - 1.0 || pos.y - e.up < 0.0 ||
      pos.y + e.down > sub_h_ - 1.0)
    throw Error(Status::out_of_bounds,
                "object path leaves the frame at frame " + std::to_string(frame));
  return pos;
}

bool Scene::shape_contains(double sx, double sy, Vec2 c, double size) const {
  switch (script_.shape) {
    case ShapeKind::disk: {
      const double dx = sx - c.x, dy = sy - c.y;
      return dx * dx + dy * dy <= size * size;
    }
    case ShapeKind::square:
      return std::abs(sx - c.x) <= size / 2 && std::abs(sy - c.y) <= size / 2;
    case ShapeKind::hand:
      return hand_contains_local((sx - c.x) / size, (sy - c.y) / size);
  }
  return false;
}

bool Scene::occluded(double sx, double sy, int frame) const {
  for (const auto& o : script_.occlusions)
    if (frame >= o.from && frame <= o.to && sx >= o.x && sx < o.x + o.w && sy >= o.y &&
        sy < o.y + o.h)
      return true;
  return false;
}

Frame Scene::render_frame(int frame) const {
  if (frame < 0 || frame >= script_.duration)
    throw Error(Status::invalid_argument, "frame index out of range");

  const int w = script_.width, h = script_.height;
  const double sx_scale = static_cast<double>(w) / sub_w_;
  const double sy_scale = static_cast<double>(h) / sub_h_;
  Frame out(w, h, std::llround(frame * 1000.0 / script_.fps));

  auto background_at = [&](double sub_x, double sub_y, std::uint8_t* c3) {
    if (script_.background == BackgroundKind::checker) {
      const int cx = static_cast<int>(std::max(0.0, sub_x)) / script_.checker_cell;
      const int cy = static_cast<int>(std::max(0.0, sub_y)) / script_.checker_cell;
      const std::uint8_t* c = ((cx + cy) % 2 == 0) ? script_.bg_a : script_.bg_b;
      c3[0] = c[0]; c3[1] = c[1]; c3[2] = c[2];
    } else {
      c3[0] = script_.bg_a[0]; c3[1] = script_.bg_a[1]; c3[2] = script_.bg_a[2];
    }
  };

  // Composite: object over background, then occlusion rectangles.
  const Vec2 center = center_at(frame);
  const double size = size_at(frame);
  for (int y = 0; y < h; ++y) {
    const double sub_y = (y + 0.5) / sy_scale - 0.5;
    for (int x = 0; x < w; ++x) {
      const double sub_x = (x + 0.5) / sx_scale - 0.5;
      std::uint8_t c[3];
      background_at(sub_x, sub_y, c);
      if (!occluded(sub_x, sub_y, frame) && shape_contains(sub_x, sub_y, center, size)) {
        c[0] = script_.color[0]; c[1] = script_.color[1]; c[2] = script_.color[2];
      }
      out.set(x, y, c[0], c[1], c[2]);
    }
  }

  if (script_.motion_blur > 1) {
    const int k = script_.motion_blur;
    Frame blurred = out;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        int sum[3] = {0, 0, 0};
        for (int i = 0; i < k; ++i) {
          const int xi = std::clamp(x + i - k / 2, 0, w - 1);
          const std::uint8_t* p = out.px(xi, y);
          sum[0] += p[0]; sum[1] += p[1]; sum[2] += p[2];
        }
        blurred.set(x, y, static_cast<std::uint8_t>(round_div(sum[0], k)),
                    static_cast<std::uint8_t>(round_div(sum[1], k)),
                    static_cast<std::uint8_t>(round_div(sum[2], k)));
      }
    }
    out = std::move(blurred);
  }

  if (script_.noise_amplitude > 0) {
    SplitMix64 rng(script_.seed ^ (0x6e6f6973ull + static_cast<std::uint64_t>(frame) * 0x9e3779b97f4a7c15ull));
    const int a = script_.noise_amplitude;
    for (std::uint8_t& v : out.rgb) {
      const int n = rng.range(-a, a);
      v = static_cast<std::uint8_t>(std::clamp(static_cast<int>(v) + n, 0, 255));
    }
  }

  int level = 0;
  for (const auto& j : script_.brightness_jumps)
    if (frame >= j.frame) level += j.offset;
  if (level != 0) {
    for (std::uint8_t& v : out.rgb)
      v = static_cast<std::uint8_t>(std::clamp(static_cast<int>(v) + level, 0, 255));
  }

  return out;
}

GroundTruth Scene::ground_truth(int frame) const {
  if (frame < 0 || frame >= script_.duration)
    throw Error(Status::invalid_argument, "frame index out of range");
  GroundTruth gt;
  gt.mask = Mask(sub_w_, sub_h_);
  const Vec2 center = center_at(frame);
  const double size = size_at(frame);
  for (int y = 0; y < sub_h_; ++y)
    for (int x = 0; x < sub_w_; ++x)
      if (!occluded(x, y, frame) && shape_contains(x, y, center, size))
        gt.mask.set(x, y, true);
  gt.area = gt.mask.area();
  gt.centroid = gt.mask.centroid();
  return gt;
}

}  // namespace sltk
