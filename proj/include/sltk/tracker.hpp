#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sltk/estimators.hpp"
#include "sltk/image.hpp"
#include "sltk/pipeline.hpp"

namespace sltk {

enum class Mode {
  initializing,
  searching,
  tracking,
  validating,
  recovering,
};

const char* mode_name(Mode m);

struct TrackerConfig {
  std::int64_t acquire_threshold = 57600;  // movement sum that starts a track
  std::int64_t idle_threshold = 4800;      // movement sum considered "no motion"
  std::int64_t idle_timeout_ms = 2000;
  std::int64_t init_delay_ms = 2000;
  double max_area_fraction = 0.60;
  double min_area_fraction = 0.02;
  int color_window = 5;     // side of the color-match window
  int color_threshold = 90; // max L1 distance of window mean colors
  std::vector<int> recovery_offsets = {10, 20};
  double smoothing_factor = 0.9;

  void validate() const;
};

struct Coord3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Mean color of the window x window square centered at p, clamped to the
/// frame. Kept as exact sums so distances can be ranked without rounding.
struct WindowColor {
  std::int64_t sum[3] = {0, 0, 0};
  std::int64_t count = 0;
};

WindowColor window_color(const Frame& frame, Point p, int window);

/// True iff the L1 distance between the two window mean colors is <= threshold.
bool color_match(const Frame& frame_a, Point point_a, const Frame& frame_b,
                 Point point_b, int window = 5, int threshold = 90);

/// Candidate reseed positions around `inner`: each offset distance times the
/// 8 compass directions, distances ascending, N,NE,E,SE,S,SW,W,NW within a
/// distance. Out-of-bounds candidates are dropped.
std::vector<Point> recovery_points(Point inner, int width, int height,
                                   const std::vector<int>& offsets = {10, 20});

/// x,y from the projection centroid; z = sqrt(area) - sqrt(reference_area),
/// so the acquisition-time area reads as depth zero.
Coord3D estimate_coords(Point centroid, double area, double reference_area);

Coord3D smooth(const Coord3D& previous, const Coord3D& next, double factor = 0.9);

struct StepResult {
  std::vector<Mode> trace;  // modes visited this step, entry mode first
  std::optional<std::int64_t> movement;
  std::optional<int> compensation;
  std::optional<ProjectionEstimate> estimate;
  std::optional<Coord3D> raw;
  std::optional<Coord3D> smoothed;

  bool output() const { return smoothed.has_value(); }
  Mode final_mode() const { return trace.back(); }
};

/// The five-state tracking machine. One owner feeds frames in timestamp
/// order; every step ends at rest in INITIALIZING, SEARCHING or TRACKING.
class Tracker {
 public:
  Tracker(PipelineConfig pipeline, EstimatorConfig estimator, TrackerConfig tracker);

  StepResult step(const Frame& frame);

  Mode mode() const { return mode_; }
  const std::optional<Point>& inner_point() const { return inner_; }
  const std::optional<double>& reference_area() const { return reference_area_; }
  /// Subsampled frame from the most recent preprocessed step, for dumps.
  const std::optional<Frame>& last_subsampled() const { return prev_frame_; }

 private:
  struct FramePrep {
    Frame subsampled;
    EdgeImage edges;
    std::optional<DiffImage> diff;
    std::optional<std::int64_t> movement;
  };

  FramePrep preprocess(const Frame& frame);
  void lose_track();
  void accept(const ProjectionEstimate& est, StepResult& result);
  std::optional<Point> pick_recovery_candidate(const FramePrep& prep,
                                               Point around) const;

  Preprocessor pre_;
  EstimatorConfig est_cfg_;
  TrackerConfig cfg_;

  Mode mode_ = Mode::initializing;
  std::optional<std::int64_t> init_deadline_;
  std::optional<std::int64_t> last_timestamp_;
  std::optional<Frame> prev_frame_;       // subsampled
  std::optional<Point> inner_;
  std::optional<Point> prev_inner_;
  std::optional<double> reference_area_;
  std::optional<Coord3D> smoothed_;
  std::optional<std::int64_t> low_movement_since_;
};

}  // namespace sltk
