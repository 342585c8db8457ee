#include "sltk/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "sltk/types.hpp"

namespace sltk {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

// Integer 8-connected Bresenham from a to b, both endpoints visited.
// The visitor returns false to stop early.
template <typename Visit>
void walk_line(Point a, Point b, Visit&& visit) {
  int x = a.x, y = a.y;
  const int dx = std::abs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
  const int dy = -std::abs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (!visit(Point{x, y})) return;
    if (x == b.x && y == b.y) return;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

// A far endpoint guaranteed to lie outside the image, so rays terminate at
// the border when no edge interrupts.
Point ray_endpoint(const EdgeImage& edges, Point origin, double angle) {
  const double reach = 4.0 * (edges.width + edges.height);
  return Point{origin.x + static_cast<int>(std::llround(std::cos(angle) * reach)),
               origin.y + static_cast<int>(std::llround(std::sin(angle) * reach))};
}

// Core traversal shared by all ray casts. When skip_origin is set the
// origin's own edge status is ignored, which is what lets recast fans
// launched from contour hits travel instead of collapsing in place.
// The visitor sees every in-bounds pixel of the path (origin included).
template <typename Visit>
Point cast_impl(const EdgeImage& edges, Point origin, double angle, bool skip_origin,
                Visit&& visit) {
  if (!edges.in_bounds(origin))
    throw Error(Status::out_of_bounds, "ray origin outside the edge image");
  if (!skip_origin && edges.is_edge(origin)) {
    visit(origin, true);
    return origin;
  }

  const Point far = ray_endpoint(edges, origin, angle);
  Point prev = origin;
  Point hit = origin;
  bool done = false;
  walk_line(origin, far, [&](Point p) {
    if (!edges.in_bounds(p)) {
      hit = prev;  // border reached: last in-bounds pixel is the hit
      done = true;
      return false;
    }
    if (p != origin && edges.is_edge(p)) {
      visit(p, true);
      hit = p;
      done = true;
      return false;
    }
    visit(p, p == origin && edges.is_edge(p));
    prev = p;
    return true;
  });
  if (!done) hit = prev;  // far endpoint was in bounds; cannot happen by construction
  return hit;
}

struct NoVisit {
  void operator()(Point, bool) const {}
};

Point round_mean(std::int64_t sum_x, std::int64_t sum_y, std::int64_t count) {
  return Point{static_cast<int>(round_div(sum_x, count)),
               static_cast<int>(round_div(sum_y, count))};
}

void dedup_points(std::vector<Point>& pts) {
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
}

Point mean_of(const std::vector<Point>& pts) {
  std::int64_t sx = 0, sy = 0;
  for (const Point& p : pts) {
    sx += p.x;
    sy += p.y;
  }
  return round_mean(sx, sy, static_cast<std::int64_t>(pts.size()));
}

// Compass neighbors in N,NE,E,SE,S,SW,W,NW order (screen coordinates,
// y grows downward).
constexpr Point kCompass[8] = {{0, -1}, {1, -1}, {1, 0},  {1, 1},
                               {0, 1},  {-1, 1}, {-1, 0}, {-1, -1}};

void require_inner(const EdgeImage& edges, Point inner) {
  if (!edges.in_bounds(inner))
    throw Error(Status::out_of_bounds, "inner point outside the edge image");
  if (edges.is_edge(inner))
    throw Error(Status::inner_on_edge, "inner point sits on an edge pixel");
}

}  // namespace

void EstimatorConfig::validate() const {
  if (rays < 4) throw Error(Status::invalid_argument, "rays must be >= 4");
  if (recast_depth < 1) throw Error(Status::invalid_argument, "recast_depth must be >= 1");
  if (block_size < 1) throw Error(Status::invalid_argument, "block_size must be >= 1");
  if (max_iterations < 1)
    throw Error(Status::invalid_argument, "max_iterations must be >= 1");
  if (convergence_epsilon <= 0)
    throw Error(Status::invalid_argument, "convergence_epsilon must be > 0");
  if (ray_budget < rays)
    throw Error(Status::invalid_argument, "ray_budget must be >= rays");
}

BlockGrid::BlockGrid(int image_width, int image_height, int block_size)
    : block_(block_size),
      image_width_(image_width),
      image_height_(image_height),
      grid_width_((image_width + block_size - 1) / block_size),
      grid_height_((image_height + block_size - 1) / block_size),
      cells_(static_cast<size_t>(grid_width_) * grid_height_, 0) {}

void BlockGrid::mark(Point pixel) { mark_block(pixel.x / block_, pixel.y / block_); }

void BlockGrid::mark_block(int bx, int by) {
  std::uint8_t& cell = cells_[static_cast<size_t>(by) * grid_width_ + bx];
  if (cell) return;
  cell = 1;
  ++count_;
  // Block centers are (b*m + (m-1)/2); doubled sums stay integral.
  center_sum_x2_ += 2 * bx * block_ + block_ - 1;
  center_sum_y2_ += 2 * by * block_ + block_ - 1;
}

Point BlockGrid::centroid() const {
  if (count_ == 0) throw Error(Status::bad_state, "centroid of an empty block grid");
  // Partial border blocks can place their nominal center outside the image;
  // keep the reported centroid inside.
  const int x = static_cast<int>(round_div(center_sum_x2_, 2 * count_));
  const int y = static_cast<int>(round_div(center_sum_y2_, 2 * count_));
  return Point{std::clamp(x, 0, image_width_ - 1), std::clamp(y, 0, image_height_ - 1)};
}

Point cast_ray(const EdgeImage& edges, Point origin, double angle) {
  return cast_impl(edges, origin, angle, false, NoVisit{});
}

Point recenter(const EdgeImage& edges, Point p, int rays) {
  std::int64_t sx = 0, sy = 0;
  for (int k = 0; k < rays; ++k) {
    const Point hit = cast_impl(edges, p, kTau * k / rays, false, NoVisit{});
    sx += hit.x;
    sy += hit.y;
  }
  const Point mean = round_mean(sx, sy, rays);
  if (!edges.is_edge(mean)) return mean;

  // The mean landed on an edge: nearest non-edge 8-neighbor, axis-aligned
  // neighbors first, compass order breaking ties.
  for (int pass = 0; pass < 2; ++pass) {
    for (const Point& d : kCompass) {
      const bool diagonal = (d.x != 0 && d.y != 0);
      if ((pass == 0) == diagonal) continue;
      const Point q{mean.x + d.x, mean.y + d.y};
      if (edges.in_bounds(q) && !edges.is_edge(q)) return q;
    }
  }
  return p;
}

Point displace_toward(const EdgeImage& edges, Point from, Point to) {
  Point last = from;
  bool blocked = false;
  walk_line(from, to, [&](Point p) {
    if (!edges.in_bounds(p) || (p != from && edges.is_edge(p))) {
      blocked = true;
      return false;
    }
    last = p;
    return true;
  });
  return blocked ? last : to;
}

ProjectionEstimate estimate_nray(const EdgeImage& edges, Point inner,
                                 const EstimatorConfig& cfg) {
  cfg.validate();
  require_inner(edges, inner);

  std::vector<Point> hits;
  hits.reserve(cfg.rays);
  double area = 0.0;
  for (int k = 0; k < cfg.rays; ++k) {
    const Point hit = cast_impl(edges, inner, kTau * k / cfg.rays, false, NoVisit{});
    hits.push_back(hit);
    area += distance(inner, hit);
  }
  dedup_points(hits);
  const Point centroid = mean_of(hits);
  const Point displaced = displace_toward(edges, inner, centroid);

  ProjectionEstimate est;
  est.centroid = centroid;
  est.area = area;
  est.inner = recenter(edges, displaced, cfg.rays);
  est.iterations = 1;
  return est;
}

namespace {

// One outer iteration's fan cascade: a level-1 fan from the origin, then a
// fan from every deduplicated hit of the previous level, recast_depth levels
// total. Returns the final level's hit set (deduplicated) and the summed
// Euclidean lengths of the final level's rays.
struct CascadeResult {
  std::vector<Point> final_hits;
  double final_length_sum = 0.0;
  bool budget_exhausted = false;
};

CascadeResult cast_cascade(const EdgeImage& edges, Point origin,
                           const EstimatorConfig& cfg, BlockGrid* grid) {
  // A block counts as run through only once the ray has entered it and left
  // it again on free pixels. A block merely grazed at a ray's stopping point
  // sits on the contour, not inside the projection, and stays unselected.
  struct RunThrough {
    BlockGrid* grid;
    int m = 1;
    bool have = false;
    int bx = 0, by = 0;
    void reset() { have = false; }
    void visit(Point p, bool on_edge) {
      if (!grid || on_edge) return;
      const int nx = p.x / m, ny = p.y / m;
      if (have && (nx != bx || ny != by)) grid->mark_block(bx, by);
      bx = nx;
      by = ny;
      have = true;
    }
  } marker{grid, grid ? grid->block_size() : 1, false, 0, 0};
  auto visit = [&marker](Point p, bool on_edge) { marker.visit(p, on_edge); };

  CascadeResult result;
  std::vector<Point> origins = {origin};
  std::vector<Point> hits;
  int rays_used = 0;

  for (int level = 1; level <= cfg.recast_depth; ++level) {
    const bool skip_origin = level > 1;  // recast origins usually sit on edges
    hits.clear();
    double length_sum = 0.0;
    for (const Point& o : origins) {
      if (rays_used + cfg.rays > cfg.ray_budget) {
        result.budget_exhausted = true;
        break;
      }
      rays_used += cfg.rays;
      for (int k = 0; k < cfg.rays; ++k) {
        marker.reset();
        const Point hit = cast_impl(edges, o, kTau * k / cfg.rays, skip_origin, visit);
        hits.push_back(hit);
        length_sum += distance(o, hit);
      }
    }
    if (hits.empty()) break;  // budget ran out before this level started
    result.final_length_sum = length_sum;
    std::vector<Point> unique_hits = hits;
    dedup_points(unique_hits);
    result.final_hits = unique_hits;
    origins = std::move(unique_hits);
    if (result.budget_exhausted) break;
  }
  return result;
}

ProjectionEstimate estimate_iterative(const EdgeImage& edges, Point inner,
                                      const EstimatorConfig& cfg, bool rasterize,
                                      IterationLog* log, BlockGrid* final_grid = nullptr) {
  cfg.validate();
  require_inner(edges, inner);

  BlockGrid grid;
  if (rasterize) grid = BlockGrid(edges.width, edges.height, cfg.block_size);

  ProjectionEstimate est;
  Point cur_inner = inner;
  Point prev_centroid = inner;
  bool exhausted = false;

  for (int i = 1; i <= cfg.max_iterations; ++i) {
    CascadeResult cascade =
        cast_cascade(edges, cur_inner, cfg, rasterize ? &grid : nullptr);
    exhausted = exhausted || cascade.budget_exhausted;

    Point centroid;
    double area;
    if (rasterize) {
      centroid = grid.centroid();
      area = grid.area();
    } else {
      centroid = mean_of(cascade.final_hits);
      area = cascade.final_length_sum;
    }
    const Point new_inner = displace_toward(edges, cur_inner, centroid);

    const double centroid_motion = distance(centroid, prev_centroid);
    const double inner_motion = distance(new_inner, cur_inner);
    prev_centroid = centroid;
    cur_inner = new_inner;

    est.centroid = centroid;
    est.area = area;
    est.iterations = i;
    if (log)
      log->push_back(IterationSnapshot{i, centroid, cur_inner, area,
                                       rasterize ? grid.count() : 0});
    if (centroid_motion < cfg.convergence_epsilon &&
        inner_motion < cfg.convergence_epsilon)
      break;
  }

  est.inner = recenter(edges, cur_inner, cfg.rays);
  est.ray_budget_exhausted = exhausted;
  if (final_grid && rasterize) *final_grid = grid;
  return est;
}

}  // namespace

ProjectionEstimate estimate_iter_nray(const EdgeImage& edges, Point inner,
                                      const EstimatorConfig& cfg, IterationLog* log) {
  EstimatorConfig flat = cfg;
  flat.recast_depth = 1;
  return estimate_iterative(edges, inner, flat, false, log);
}

ProjectionEstimate estimate_iter_nyray(const EdgeImage& edges, Point inner,
                                       const EstimatorConfig& cfg, IterationLog* log) {
  return estimate_iterative(edges, inner, cfg, false, log);
}

ProjectionEstimate estimate_iter_nyray_raster(const EdgeImage& edges, Point inner,
                                              const EstimatorConfig& cfg,
                                              IterationLog* log, BlockGrid* final_grid) {
  return estimate_iterative(edges, inner, cfg, true, log, final_grid);
}

Point nudge_off_edge(const EdgeImage& edges, Point p) {
  if (!edges.in_bounds(p))
    throw Error(Status::out_of_bounds, "point outside the edge image");
  if (!edges.is_edge(p)) return p;
  const int max_ring = std::max(edges.width, edges.height);
  for (int r = 1; r < max_ring; ++r) {
    // Full Chebyshev ring at distance r; among non-edge pixels take the one
    // closest in Euclidean distance, clockwise from N breaking ties.
    Point best{};
    long best_d2 = -1;
    auto consider = [&](int dx, int dy) {
      const Point q{p.x + dx, p.y + dy};
      if (!edges.in_bounds(q) || edges.is_edge(q)) return;
      const long d2 = static_cast<long>(dx) * dx + static_cast<long>(dy) * dy;
      if (best_d2 < 0 || d2 < best_d2) {
        best_d2 = d2;
        best = q;
      }
    };
    for (int dx = 0; dx <= r; ++dx) consider(dx, -r);      // N to NE corner
    for (int dy = -r + 1; dy <= r; ++dy) consider(r, dy);  // E side down
    for (int dx = r - 1; dx >= -r; --dx) consider(dx, r);  // S side leftward
    for (int dy = r - 1; dy >= -r; --dy) consider(-r, dy); // W side up
    for (int dx = -r + 1; dx < 0; ++dx) consider(dx, -r);  // back to N
    if (best_d2 >= 0) return best;
  }
  throw Error(Status::inner_on_edge, "no non-edge pixel reachable from point");
}

}  // namespace sltk
