#pragma once

#include <cstdint>
#include <vector>

#include "sltk/image.hpp"

namespace sltk {

struct PipelineConfig {
  int blur_radius = 5;
  int target_width = 160;
  int target_height = 120;
  int edge_threshold = 128;
  int diff_distinct_values = 10;   // how many smallest distinct raw values feed compensation
  int diff_compensation_cap = 64;  // upper bound on the subtracted brightness change

  void validate() const;
};

/// Poisson-disk sample offsets for a given radius: fixed-seed dart throwing,
/// minimum inter-sample distance radius/2, always contains (0,0). The same
/// radius always yields the same offsets, in (y,x) order.
std::vector<Point> poisson_disk_offsets(int radius);

Frame poisson_blur(const Frame& frame, const std::vector<Point>& offsets);
Frame poisson_blur(const Frame& frame, int radius);

Frame subsample(const Frame& frame, int target_width, int target_height);

GrayImage to_gray(const Frame& frame);

EdgeImage sobel_edges(const GrayImage& gray, int edge_threshold = 128);

DiffImage abs_diff(const Frame& prev, const Frame& cur, int distinct_values = 10,
                   int compensation_cap = 64);

std::int64_t global_movement(const DiffImage& diff);

Point center_of_mass(const DiffImage& diff);

/// Per-stream preprocessing: blur at capture resolution, subsample, edge
/// image. Holds the blur offsets so they are generated once per stream.
class Preprocessor {
 public:
  explicit Preprocessor(PipelineConfig cfg);

  struct Output {
    Frame subsampled;
    EdgeImage edges;
  };

  Output run(const Frame& frame) const;
  const PipelineConfig& config() const { return cfg_; }

 private:
  PipelineConfig cfg_;
  std::vector<Point> blur_offsets_;
};

}  // namespace sltk
