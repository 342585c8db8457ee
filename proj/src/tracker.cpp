#include "sltk/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "sltk/types.hpp"

namespace sltk {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::initializing: return "INITIALIZING";
    case Mode::searching: return "SEARCHING";
    case Mode::tracking: return "TRACKING";
    case Mode::validating: return "VALIDATING";
    case Mode::recovering: return "RECOVERING";
  }
  return "?";
}

void TrackerConfig::validate() const {
  if (acquire_threshold <= 0 || idle_threshold <= 0)
    throw Error(Status::invalid_argument, "movement thresholds must be positive");
  if (idle_timeout_ms <= 0 || init_delay_ms < 0)
    throw Error(Status::invalid_argument, "timeouts must be nonnegative");
  if (max_area_fraction <= 0 || max_area_fraction >= 1 || min_area_fraction <= 0 ||
      min_area_fraction >= 1 || min_area_fraction >= max_area_fraction)
    throw Error(Status::invalid_argument, "area fractions must satisfy 0 < min < max < 1");
  if (color_window < 1 || color_window % 2 == 0)
    throw Error(Status::invalid_argument, "color_window must be odd and positive");
  if (color_threshold < 0)
    throw Error(Status::invalid_argument, "color_threshold must be >= 0");
  if (recovery_offsets.empty())
    throw Error(Status::invalid_argument, "recovery_offsets must not be empty");
  if (smoothing_factor < 0 || smoothing_factor >= 1)
    throw Error(Status::invalid_argument, "smoothing_factor must be in [0,1)");
}

WindowColor window_color(const Frame& frame, Point p, int window) {
  const int half = window / 2;
  const int x0 = std::max(0, p.x - half), x1 = std::min(frame.width - 1, p.x + half);
  const int y0 = std::max(0, p.y - half), y1 = std::min(frame.height - 1, p.y + half);
  WindowColor wc;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const std::uint8_t* px = frame.px(x, y);
      wc.sum[0] += px[0];
      wc.sum[1] += px[1];
      wc.sum[2] += px[2];
      ++wc.count;
    }
  }
  return wc;
}

namespace {

// L1 distance of two window means, as an exact fraction num/(count_a*count_b).
std::int64_t color_distance_num(const WindowColor& a, const WindowColor& b) {
  std::int64_t num = 0;
  for (int c = 0; c < 3; ++c) num += std::llabs(a.sum[c] * b.count - b.sum[c] * a.count);
  return num;
}

}  // namespace

bool color_match(const Frame& frame_a, Point point_a, const Frame& frame_b,
                 Point point_b, int window, int threshold) {
  if (!frame_a.in_bounds(point_a) || !frame_b.in_bounds(point_b))
    throw Error(Status::out_of_bounds, "color match point outside the frame");
  const WindowColor a = window_color(frame_a, point_a, window);
  const WindowColor b = window_color(frame_b, point_b, window);
  return color_distance_num(a, b) <= static_cast<std::int64_t>(threshold) * a.count * b.count;
}

std::vector<Point> recovery_points(Point inner, int width, int height,
                                   const std::vector<int>& offsets) {
  static constexpr Point kDirs[8] = {{0, -1}, {1, -1}, {1, 0},  {1, 1},
                                     {0, 1},  {-1, 1}, {-1, 0}, {-1, -1}};
  std::vector<Point> points;
  for (int d : offsets) {
    for (const Point& u : kDirs) {
      const Point p{inner.x + d * u.x, inner.y + d * u.y};
      if (p.x >= 0 && p.y >= 0 && p.x < width && p.y < height) points.push_back(p);
    }
  }
  return points;
}

Coord3D estimate_coords(Point centroid, double area, double reference_area) {
  if (reference_area <= 0)
    throw Error(Status::invalid_argument, "reference area must be positive");
  if (area < 0) throw Error(Status::invalid_argument, "area must be nonnegative");
  return Coord3D{static_cast<double>(centroid.x), static_cast<double>(centroid.y),
                 std::sqrt(area) - std::sqrt(reference_area)};
}

Coord3D smooth(const Coord3D& previous, const Coord3D& next, double factor) {
  const double keep = factor, take = 1.0 - factor;
  return Coord3D{keep * previous.x + take * next.x, keep * previous.y + take * next.y,
                 keep * previous.z + take * next.z};
}

Tracker::Tracker(PipelineConfig pipeline, EstimatorConfig estimator, TrackerConfig tracker)
    : pre_(pipeline), est_cfg_(estimator), cfg_(tracker) {
  est_cfg_.validate();
  cfg_.validate();
}

Tracker::FramePrep Tracker::preprocess(const Frame& frame) {
  Preprocessor::Output out = pre_.run(frame);
  FramePrep prep{std::move(out.subsampled), std::move(out.edges), std::nullopt,
                 std::nullopt};
  if (prev_frame_) {
    prep.diff = abs_diff(*prev_frame_, prep.subsampled,
                         pre_.config().diff_distinct_values,
                         pre_.config().diff_compensation_cap);
    prep.movement = global_movement(*prep.diff);
  }
  return prep;
}

void Tracker::lose_track() {
  mode_ = Mode::searching;
  inner_.reset();
  prev_inner_.reset();
  reference_area_.reset();
  smoothed_.reset();
  low_movement_since_.reset();
}

void Tracker::accept(const ProjectionEstimate& est, StepResult& result) {
  inner_ = est.inner;
  Coord3D raw = estimate_coords(est.centroid, est.area, *reference_area_);
  Coord3D out = smoothed_ ? smooth(*smoothed_, raw, cfg_.smoothing_factor) : raw;
  smoothed_ = out;
  result.raw = raw;
  result.smoothed = out;
}

std::optional<Point> Tracker::pick_recovery_candidate(const FramePrep& prep,
                                                      Point around) const {
  const WindowColor ref = window_color(*prev_frame_, *prev_inner_, cfg_.color_window);
  const std::int64_t thr = cfg_.color_threshold;

  std::optional<Point> best;
  std::int64_t best_num = 0, best_den = 1;
  for (const Point& cand :
       recovery_points(around, prep.subsampled.width, prep.subsampled.height,
                       cfg_.recovery_offsets)) {
    if (prep.edges.is_edge(cand)) continue;  // cannot seed an estimation
    const WindowColor cc = window_color(prep.subsampled, cand, cfg_.color_window);
    const std::int64_t num = color_distance_num(ref, cc);
    const std::int64_t den = ref.count * cc.count;
    if (num > thr * den) continue;  // fails the color match
    // Exact fraction comparison keeps candidate ranking deterministic.
    if (!best || num * best_den < best_num * den) {
      best = cand;
      best_num = num;
      best_den = den;
    }
  }
  return best;
}

StepResult Tracker::step(const Frame& frame) {
  if (last_timestamp_ && frame.timestamp_ms <= *last_timestamp_)
    throw Error(Status::nonmonotonic_timestamp,
                "frame timestamps must strictly increase");
  last_timestamp_ = frame.timestamp_ms;

  StepResult result;
  result.trace.push_back(mode_);

  if (mode_ == Mode::initializing) {
    if (!init_deadline_) init_deadline_ = frame.timestamp_ms + cfg_.init_delay_ms;
    if (frame.timestamp_ms < *init_deadline_) return result;  // still settling
    FramePrep prep = preprocess(frame);
    prev_frame_ = std::move(prep.subsampled);
    mode_ = Mode::searching;
    result.trace.push_back(mode_);
    return result;
  }

  FramePrep prep = preprocess(frame);
  result.movement = prep.movement;
  if (prep.diff) result.compensation = prep.diff->compensation;

  if (mode_ == Mode::searching) {
    if (prep.movement && *prep.movement > cfg_.acquire_threshold) {
      // A new target: seed both centroid and inner point at the center of
      // mass of the movement. The first TRACKING estimate will set the
      // reference area; until then depth reads zero.
      const Point com = center_of_mass(*prep.diff);
      inner_ = com;
      prev_inner_ = com;
      reference_area_.reset();
      low_movement_since_.reset();
      mode_ = Mode::tracking;
      result.trace.push_back(mode_);
      Coord3D raw{static_cast<double>(com.x), static_cast<double>(com.y), 0.0};
      smoothed_ = raw;
      result.raw = raw;
      result.smoothed = raw;
    }
    prev_frame_ = std::move(prep.subsampled);
    return result;
  }

  // TRACKING entry.
  const std::int64_t t = frame.timestamp_ms;
  if (prep.movement && *prep.movement < cfg_.idle_threshold) {
    if (!low_movement_since_) low_movement_since_ = t;
  } else {
    low_movement_since_.reset();
  }
  if (low_movement_since_ && t - *low_movement_since_ >= cfg_.idle_timeout_ms) {
    lose_track();
    result.trace.push_back(mode_);
    prev_frame_ = std::move(prep.subsampled);
    return result;
  }

  ProjectionEstimate est;
  bool estimated = false;
  try {
    const Point seed = nudge_off_edge(prep.edges, *inner_);
    est = estimate_iter_nyray_raster(prep.edges, seed, est_cfg_);
    estimated = true;
  } catch (const Error&) {
    // No usable seed (pathological edge image): treat as a tracking failure.
  }

  const double screen = static_cast<double>(prep.subsampled.width) *
                        static_cast<double>(prep.subsampled.height);
  if (!estimated || est.area > cfg_.max_area_fraction * screen ||
      est.area < cfg_.min_area_fraction * screen) {
    if (estimated) result.estimate = est;
    lose_track();
    result.trace.push_back(mode_);
    prev_frame_ = std::move(prep.subsampled);
    return result;
  }
  if (!reference_area_) reference_area_ = est.area;
  result.estimate = est;

  mode_ = Mode::validating;
  result.trace.push_back(mode_);
  const bool consistent = color_match(*prev_frame_, *prev_inner_, prep.subsampled,
                                      est.inner, cfg_.color_window, cfg_.color_threshold);
  if (consistent) {
    mode_ = Mode::tracking;
    result.trace.push_back(mode_);
    accept(est, result);
  } else {
    mode_ = Mode::recovering;
    result.trace.push_back(mode_);
    bool recovered = false;
    if (std::optional<Point> cand = pick_recovery_candidate(prep, est.inner)) {
      ProjectionEstimate retry = estimate_iter_nyray_raster(prep.edges, *cand, est_cfg_);
      if (color_match(*prev_frame_, *prev_inner_, prep.subsampled, retry.inner,
                      cfg_.color_window, cfg_.color_threshold)) {
        result.estimate = retry;
        mode_ = Mode::tracking;
        result.trace.push_back(mode_);
        accept(retry, result);
        recovered = true;
      }
    }
    if (!recovered) {
      lose_track();
      result.trace.push_back(mode_);
    }
  }

  if (mode_ == Mode::tracking) prev_inner_ = inner_;
  prev_frame_ = std::move(prep.subsampled);
  return result;
}

}  // namespace sltk
