#pragma once

#include <cstdint>
#include <vector>

#include "sltk/image.hpp"

namespace sltk {

struct EstimatorConfig {
  int rays = 16;                    // n: rays per fan
  int recast_depth = 2;             // y: fan levels (1 = no recasting)
  int block_size = 8;               // m: rasterization block side
  int max_iterations = 10;
  double convergence_epsilon = 1.0; // pixels of centroid/inner motion
  int ray_budget = 65536;           // per outer iteration, all levels combined

  void validate() const;
};

/// Result of one projection-feature estimation: where the projection is
/// (centroid), how big it is (area), and the relocated inner point. Area
/// units depend on the estimator: summed ray lengths for the plain and
/// recast variants, block_size^2 * selected blocks for the rasterized one.
struct ProjectionEstimate {
  Point centroid;
  double area = 0.0;
  Point inner;
  int iterations = 1;
  bool ray_budget_exhausted = false;
};

/// Per-outer-iteration snapshot, for invariant checks and diagnostics.
struct IterationSnapshot {
  int iteration = 0;
  Point centroid;
  Point inner;
  double area = 0.0;
  std::int64_t selected_blocks = 0;  // 0 for non-rasterized estimators
};
using IterationLog = std::vector<IterationSnapshot>;

/// m x m occupancy grid over the edge image. Blocks only ever get added;
/// the running center sums make the block centroid O(1).
class BlockGrid {
 public:
  BlockGrid() = default;
  BlockGrid(int image_width, int image_height, int block_size);

  void mark(Point pixel);
  void mark_block(int bx, int by);
  bool selected(int bx, int by) const {
    return cells_[static_cast<size_t>(by) * grid_width_ + bx] != 0;
  }
  std::int64_t count() const { return count_; }
  double area() const { return static_cast<double>(block_) * block_ * count_; }
  Point centroid() const;  // rounded mean of selected block centers
  int block_size() const { return block_; }
  int grid_width() const { return grid_width_; }
  int grid_height() const { return grid_height_; }

 private:
  int block_ = 8;
  int image_width_ = 0;
  int image_height_ = 0;
  int grid_width_ = 0;
  int grid_height_ = 0;
  std::vector<std::uint8_t> cells_;
  std::int64_t count_ = 0;
  std::int64_t center_sum_x2_ = 0;  // sum of 2*center coordinates, kept integral
  std::int64_t center_sum_y2_ = 0;
};

/// Walks pixel-by-pixel (8-connected) from origin along the angle. Returns
/// the first edge pixel hit, the last in-bounds pixel if the border is
/// reached first, or origin itself when origin already sits on an edge.
/// Throws Error(out_of_bounds) for an origin outside the image.
Point cast_ray(const EdgeImage& edges, Point origin, double angle);

/// Casts `rays` evenly spaced rays from p and moves p to the rounded mean of
/// the hits. A mean landing on an edge falls back to the nearest non-edge
/// 8-neighbor (N,NE,E,SE,S,SW,W,NW order breaks ties), or stays at p.
Point recenter(const EdgeImage& edges, Point p, int rays);

/// Walks the integer line from->to; returns `to` if no edge interrupts,
/// otherwise the last non-edge pixel before the first edge on the path.
Point displace_toward(const EdgeImage& edges, Point from, Point to);

ProjectionEstimate estimate_nray(const EdgeImage& edges, Point inner,
                                 const EstimatorConfig& cfg);

ProjectionEstimate estimate_iter_nray(const EdgeImage& edges, Point inner,
                                      const EstimatorConfig& cfg,
                                      IterationLog* log = nullptr);

ProjectionEstimate estimate_iter_nyray(const EdgeImage& edges, Point inner,
                                       const EstimatorConfig& cfg,
                                       IterationLog* log = nullptr);

ProjectionEstimate estimate_iter_nyray_raster(const EdgeImage& edges, Point inner,
                                              const EstimatorConfig& cfg,
                                              IterationLog* log = nullptr,
                                              BlockGrid* final_grid = nullptr);

/// Nearest non-edge pixel to p, scanning growing Chebyshev rings in a fixed
/// order. Used to reseed an inner point that drifted onto an edge.
/// Throws Error(inner_on_edge) if the whole image is edges.
Point nudge_off_edge(const EdgeImage& edges, Point p);

}  // namespace sltk
