#include "sltk/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "sltk/types.hpp"

namespace sltk {

const char* status_name(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::invalid_argument: return "invalid_argument";
    case Status::bad_dimensions: return "bad_dimensions";
    case Status::out_of_bounds: return "out_of_bounds";
    case Status::inner_on_edge: return "inner_on_edge";
    case Status::all_zero_image: return "all_zero_image";
    case Status::nonmonotonic_timestamp: return "nonmonotonic_timestamp";
    case Status::parse_error: return "parse_error";
    case Status::io_error: return "io_error";
    case Status::unknown_key: return "unknown_key";
    case Status::bad_state: return "bad_state";
  }
  return "unknown";
}

Frame Frame::solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b,
                   std::int64_t t) {
  Frame f(w, h, t);
  for (size_t i = 0; i < f.rgb.size(); i += 3) {
    f.rgb[i] = r;
    f.rgb[i + 1] = g;
    f.rgb[i + 2] = b;
  }
  return f;
}

void PipelineConfig::validate() const {
  if (blur_radius < 0) throw Error(Status::invalid_argument, "blur_radius must be >= 0");
  if (target_width < 3 || target_height < 3)
    throw Error(Status::invalid_argument, "target dimensions must be >= 3");
  if (edge_threshold < 0 || edge_threshold > 255)
    throw Error(Status::invalid_argument, "edge_threshold must be in 0..255");
  if (diff_distinct_values < 1)
    throw Error(Status::invalid_argument, "diff_distinct_values must be >= 1");
  if (diff_compensation_cap < 0 || diff_compensation_cap > 255)
    throw Error(Status::invalid_argument, "diff_compensation_cap must be in 0..255");
}

std::vector<Point> poisson_disk_offsets(int radius) {
  if (radius < 0) throw Error(Status::invalid_argument, "blur radius must be >= 0");
  if (radius == 0) return {Point{0, 0}};

  // Candidate offsets inside the disk.
  std::vector<Point> candidates;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) candidates.push_back(Point{dx, dy});

  const double min_dist = radius / 2.0;
  const double min_dist_sq = min_dist * min_dist;
  std::vector<Point> samples = {Point{0, 0}};

  // Dart throwing with a fixed seed; the attempt count is generous enough to
  // make the accepted set stable (saturation) for any realistic radius.
  SplitMix64 rng(0x534c544bull ^ static_cast<std::uint64_t>(radius));
  const std::uint64_t attempts = 256ull * candidates.size();
  for (std::uint64_t i = 0; i < attempts; ++i) {
    Point c = candidates[rng.below(candidates.size())];
    bool ok = true;
    for (const Point& s : samples) {
      double dx = c.x - s.x, dy = c.y - s.y;
      if (dx * dx + dy * dy < min_dist_sq) {
        ok = false;
        break;
      }
    }
    if (ok) samples.push_back(c);
  }
  std::sort(samples.begin(), samples.end(),
            [](Point a, Point b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  return samples;
}

Frame poisson_blur(const Frame& frame, const std::vector<Point>& offsets) {
  if (offsets.size() == 1 && offsets[0] == Point{0, 0}) return frame;

  Frame out(frame.width, frame.height, frame.timestamp_ms);
  const int w = frame.width, h = frame.height;
  const int n = static_cast<int>(offsets.size());

  // Offsets never reach beyond the radius, so everything at least `radius`
  // away from the border takes the clamp-free path.
  int radius = 0;
  for (const Point& o : offsets)
    radius = std::max({radius, std::abs(o.x), std::abs(o.y)});

  for (int y = 0; y < h; ++y) {
    const bool y_interior = (y >= radius && y < h - radius);
    for (int x = 0; x < w; ++x) {
      int sr = 0, sg = 0, sb = 0;
      if (y_interior && x >= radius && x < w - radius) {
        for (const Point& o : offsets) {
          const std::uint8_t* p = frame.px(x + o.x, y + o.y);
          sr += p[0];
          sg += p[1];
          sb += p[2];
        }
      } else {
        for (const Point& o : offsets) {
          int sx = std::clamp(x + o.x, 0, w - 1);
          int sy = std::clamp(y + o.y, 0, h - 1);
          const std::uint8_t* p = frame.px(sx, sy);
          sr += p[0];
          sg += p[1];
          sb += p[2];
        }
      }
      out.set(x, y, static_cast<std::uint8_t>(round_div(sr, n)),
              static_cast<std::uint8_t>(round_div(sg, n)),
              static_cast<std::uint8_t>(round_div(sb, n)));
    }
  }
  return out;
}

Frame poisson_blur(const Frame& frame, int radius) {
  return poisson_blur(frame, poisson_disk_offsets(radius));
}

Frame subsample(const Frame& frame, int target_width, int target_height) {
  if (target_width <= 0 || target_height <= 0)
    throw Error(Status::invalid_argument, "subsample target must be positive");
  if (frame.width == target_width && frame.height == target_height) return frame;
  if (frame.width % target_width != 0 || frame.height % target_height != 0 ||
      frame.width < target_width || frame.height < target_height)
    throw Error(Status::bad_dimensions,
                "input dimensions must be integer multiples of the target");

  const int bx = frame.width / target_width;
  const int by = frame.height / target_height;
  const int block = bx * by;

  Frame out(target_width, target_height, frame.timestamp_ms);
  for (int ty = 0; ty < target_height; ++ty) {
    for (int tx = 0; tx < target_width; ++tx) {
      int sr = 0, sg = 0, sb = 0;
      for (int dy = 0; dy < by; ++dy) {
        const std::uint8_t* row = frame.px(tx * bx, ty * by + dy);
        for (int dx = 0; dx < bx; ++dx) {
          sr += row[0];
          sg += row[1];
          sb += row[2];
          row += 3;
        }
      }
      out.set(tx, ty, static_cast<std::uint8_t>(round_div(sr, block)),
              static_cast<std::uint8_t>(round_div(sg, block)),
              static_cast<std::uint8_t>(round_div(sb, block)));
    }
  }
  return out;
}

GrayImage to_gray(const Frame& frame) {
  GrayImage g(frame.width, frame.height);
  const std::uint8_t* p = frame.rgb.data();
  for (size_t i = 0; i < g.values.size(); ++i, p += 3) {
    // round(0.299 R + 0.587 G + 0.114 B) in integer arithmetic
    g.values[i] = static_cast<std::uint8_t>(
        (299 * p[0] + 587 * p[1] + 114 * p[2] + 500) / 1000);
  }
  return g;
}

EdgeImage sobel_edges(const GrayImage& gray, int edge_threshold) {
  const int w = gray.width, h = gray.height;
  if (w < 3 || h < 3)
    throw Error(Status::bad_dimensions, "sobel needs at least a 3x3 image");

  EdgeImage edges(w, h, edge_threshold);
  auto clamped = [&](int x, int y) -> int {
    return gray.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };

  for (int y = 0; y < h; ++y) {
    const bool border_y = (y == 0 || y == h - 1);
    for (int x = 0; x < w; ++x) {
      int p00, p01, p02, p10, p12, p20, p21, p22;
      if (!border_y && x > 0 && x < w - 1) {
        p00 = gray.at(x - 1, y - 1); p01 = gray.at(x, y - 1); p02 = gray.at(x + 1, y - 1);
        p10 = gray.at(x - 1, y);                               p12 = gray.at(x + 1, y);
        p20 = gray.at(x - 1, y + 1); p21 = gray.at(x, y + 1); p22 = gray.at(x + 1, y + 1);
      } else {
        p00 = clamped(x - 1, y - 1); p01 = clamped(x, y - 1); p02 = clamped(x + 1, y - 1);
        p10 = clamped(x - 1, y);                              p12 = clamped(x + 1, y);
        p20 = clamped(x - 1, y + 1); p21 = clamped(x, y + 1); p22 = clamped(x + 1, y + 1);
      }
      const int gx = (p02 + 2 * p12 + p22) - (p00 + 2 * p10 + p20);
      const int gy = (p20 + 2 * p21 + p22) - (p00 + 2 * p01 + p02);
      const int mag = static_cast<int>(
          std::floor(std::sqrt(static_cast<double>(gx) * gx + static_cast<double>(gy) * gy) + 0.5));
      edges.magnitude(x, y) = static_cast<std::uint8_t>(std::min(255, mag));
    }
  }
  return edges;
}

DiffImage abs_diff(const Frame& prev, const Frame& cur, int distinct_values,
                   int compensation_cap) {
  if (!prev.same_size(cur))
    throw Error(Status::bad_dimensions, "difference requires equal frame dimensions");

  const size_t n = static_cast<size_t>(prev.width) * prev.height;
  std::vector<std::uint8_t> raw(n);
  std::array<bool, 256> present{};
  const std::uint8_t* a = prev.rgb.data();
  const std::uint8_t* b = cur.rgb.data();
  for (size_t i = 0; i < n; ++i, a += 3, b += 3) {
    const int s = std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]);
    const std::uint8_t v = static_cast<std::uint8_t>((2 * s + 3) / 6);  // round(s/3)
    raw[i] = v;
    present[v] = true;
  }

  // Compensation: the largest of the k smallest distinct raw values, where k
  // is diff_distinct_values (fewer if fewer distinct values exist), capped.
  int comp = 0, seen = 0;
  for (int v = 0; v < 256 && seen < distinct_values; ++v) {
    if (present[v]) {
      comp = v;
      ++seen;
    }
  }
  comp = std::min(comp, compensation_cap);

  DiffImage diff(prev.width, prev.height);
  diff.compensation = comp;
  for (size_t i = 0; i < n; ++i)
    diff.values[i] = static_cast<std::uint8_t>(std::max(0, raw[i] - comp));
  return diff;
}

std::int64_t global_movement(const DiffImage& diff) {
  std::int64_t sum = 0;
  for (std::uint8_t v : diff.values) sum += v;
  return sum;
}

Point center_of_mass(const DiffImage& diff) {
  std::int64_t sum = 0, sx = 0, sy = 0;
  for (int y = 0; y < diff.height; ++y) {
    for (int x = 0; x < diff.width; ++x) {
      const std::int64_t v = diff.at(x, y);
      sum += v;
      sx += v * x;
      sy += v * y;
    }
  }
  if (sum == 0)
    throw Error(Status::all_zero_image, "center of mass of an all-zero difference image");
  return Point{static_cast<int>(round_div(sx, sum)), static_cast<int>(round_div(sy, sum))};
}

Preprocessor::Preprocessor(PipelineConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  blur_offsets_ = poisson_disk_offsets(cfg_.blur_radius);
}

Preprocessor::Output Preprocessor::run(const Frame& frame) const {
  if (frame.width < cfg_.target_width || frame.height < cfg_.target_height ||
      frame.width % cfg_.target_width != 0 || frame.height % cfg_.target_height != 0)
    throw Error(Status::bad_dimensions,
                "capture dimensions must be integer multiples of the tracking resolution");
  Frame blurred = poisson_blur(frame, blur_offsets_);
  Frame sub = subsample(blurred, cfg_.target_width, cfg_.target_height);
  EdgeImage edges = sobel_edges(to_gray(sub), cfg_.edge_threshold);
  return Output{std::move(sub), std::move(edges)};
}

}  // namespace sltk
