#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "sltk/scene.hpp"
#include "sltk/tracker.hpp"
#include "sltk/types.hpp"

using namespace sltk;

namespace {

Tracker make_tracker(std::int64_t init_delay_ms = 2000) {
  PipelineConfig pipeline;
  EstimatorConfig estimator;
  TrackerConfig tracker;
  tracker.init_delay_ms = init_delay_ms;
  return Tracker(pipeline, estimator, tracker);
}

// 320x240 capture frame with a filled dark square on a light background.
Frame square_frame(double cx, double cy, double side, std::int64_t t,
                   std::uint8_t bg = 230, std::uint8_t fg = 20) {
  Frame f = Frame::solid(320, 240, bg, bg, bg);
  f.timestamp_ms = t;
  for (int y = 0; y < 240; ++y)
    for (int x = 0; x < 320; ++x) {
      const double sx = (x + 0.5) / 2.0 - 0.5, sy = (y + 0.5) / 2.0 - 0.5;
      if (std::abs(sx - cx) <= side / 2 && std::abs(sy - cy) <= side / 2)
        f.set(x, y, fg, fg, fg);
    }
  return f;
}

bool ends_in(const StepResult& r, Mode m) { return r.trace.back() == m; }

}  // namespace

TEST_SUITE_BEGIN("tracker");

TEST_CASE("color_match examples") {
  const Frame a = Frame::solid(160, 120, 100, 100, 100);
  const Frame b = Frame::solid(160, 120, 130, 130, 130);
  const Frame black = Frame::solid(160, 120, 0, 0, 0);
  const Frame white = Frame::solid(160, 120, 255, 255, 255);

  CHECK(color_match(a, {80, 60}, a, {80, 60}));
  CHECK_FALSE(color_match(black, {80, 60}, white, {80, 60}));  // 765 > 90
  CHECK(color_match(a, {80, 60}, b, {80, 60}));                // exactly 90
  const Frame c = Frame::solid(160, 120, 131, 130, 130);
  CHECK_FALSE(color_match(a, {80, 60}, c, {80, 60}));          // 91 > 90
}

TEST_CASE("color_match is symmetric, reflexive, and clamps at borders") {
  Frame a = Frame::solid(160, 120, 10, 20, 30);
  Frame b = Frame::solid(160, 120, 40, 50, 60);
  SplitMix64 rng(5);
  for (auto& v : a.rgb) v = static_cast<std::uint8_t>(rng.below(256));
  for (auto& v : b.rgb) v = static_cast<std::uint8_t>(rng.below(256));
  for (Point p : {Point{0, 0}, Point{159, 119}, Point{80, 60}, Point{1, 118}}) {
    CHECK(color_match(a, p, a, p));
    CHECK(color_match(a, p, b, p) == color_match(b, p, a, p));
  }
}

TEST_CASE("recovery_points enumerates two rings of compass offsets") {
  const auto pts = recovery_points(Point{80, 60}, 160, 120);
  REQUIRE(pts.size() == 16);
  CHECK(pts.front() == Point{80, 50});  // N, 10
  CHECK(pts.back() == Point{60, 40});   // NW, 20
  // horizontal candidates present
  auto has = [&](Point q) { return std::find(pts.begin(), pts.end(), q) != pts.end(); };
  CHECK(has(Point{90, 60}));
  CHECK(has(Point{100, 60}));
  CHECK(has(Point{70, 60}));
  CHECK(has(Point{60, 60}));
}

TEST_CASE("recovery_points drops out-of-bounds candidates") {
  const auto pts = recovery_points(Point{2, 2}, 160, 120);
  CHECK(pts.size() < 16);
  for (const Point& p : pts) {
    CHECK(p.x >= 0);
    CHECK(p.y >= 0);
  }
}

TEST_CASE("estimate_coords zeroes depth at the reference area") {
  const Coord3D at_ref = estimate_coords(Point{10, 20}, 400.0, 400.0);
  CHECK(at_ref.x == 10.0);
  CHECK(at_ref.y == 20.0);
  CHECK(at_ref.z == 0.0);

  const Coord3D closer = estimate_coords(Point{0, 0}, 1600.0, 400.0);
  CHECK(closer.z == doctest::Approx(20.0));  // sqrt(4*ref) - sqrt(ref) = sqrt(ref)

  const Coord3D farther = estimate_coords(Point{0, 0}, 100.0, 400.0);
  CHECK(farther.z == doctest::Approx(-10.0));  // -sqrt(ref)/2

  CHECK_THROWS_AS(estimate_coords(Point{0, 0}, 10.0, 0.0), Error);
}

TEST_CASE("smooth keeps nine tenths of the old value") {
  const Coord3D same = smooth({5, 6, 7}, {5, 6, 7});
  CHECK(same.x == 5.0);
  CHECK(same.z == 7.0);

  CHECK(smooth({0, 0, 0}, {10, 0, 0}).x == doctest::Approx(1.0));

  const Coord3D mixed = smooth({10, 10, 0}, {20, 30, 5});
  CHECK(mixed.x == doctest::Approx(11.0));
  CHECK(mixed.y == doctest::Approx(12.0));
  CHECK(mixed.z == doctest::Approx(0.5));
}

TEST_CASE("initializing consumes frames until the delay elapses") {
  Tracker tracker = make_tracker();
  const Frame still = square_frame(80, 60, 0, 0);

  StepResult r = tracker.step(still);
  CHECK(r.trace == std::vector<Mode>{Mode::initializing});
  CHECK_FALSE(r.output());

  Frame at500 = still;
  at500.timestamp_ms = 500;
  r = tracker.step(at500);
  CHECK(r.trace == std::vector<Mode>{Mode::initializing});
  CHECK_FALSE(r.output());

  Frame at2000 = still;
  at2000.timestamp_ms = 2000;
  r = tracker.step(at2000);
  CHECK(r.trace == std::vector<Mode>{Mode::initializing, Mode::searching});
  CHECK_FALSE(r.output());
  CHECK(tracker.mode() == Mode::searching);
}

TEST_CASE("timestamps must strictly increase") {
  Tracker tracker = make_tracker();
  tracker.step(square_frame(80, 60, 0, 0));
  CHECK_THROWS_AS(tracker.step(square_frame(80, 60, 0, 0)), Error);
}

TEST_CASE("searching stays put on a static scene") {
  Tracker tracker = make_tracker(0);
  std::int64_t t = 0;
  tracker.step(square_frame(80, 60, 30, t));  // initializing -> searching
  for (int i = 0; i < 5; ++i) {
    t += 33;
    const StepResult r = tracker.step(square_frame(80, 60, 30, t));
    CHECK(r.trace == std::vector<Mode>{Mode::searching});
    CHECK(r.movement.has_value());
    CHECK(*r.movement == 0);
    CHECK_FALSE(r.output());
  }
}

TEST_CASE("searching acquires a moving block at its center of mass") {
  // A 20x20 block flips from black to white between two frames. The raw
  // change is 20*20*255 = 102,000; the tracker sees it through its own blur
  // and compensation, so the expected movement and center of mass come from
  // running the pipeline as the oracle.
  Tracker tracker = make_tracker(0);
  Frame a = Frame::solid(160, 120, 0, 0, 0);
  a.timestamp_ms = 0;
  Frame b = Frame::solid(160, 120, 0, 0, 0);
  b.timestamp_ms = 33;
  for (int y = 50; y < 70; ++y)
    for (int x = 70; x < 90; ++x) b.set(x, y, 255, 255, 255);

  Preprocessor pre{PipelineConfig{}};
  const DiffImage diff = abs_diff(pre.run(a).subsampled, pre.run(b).subsampled);
  const std::int64_t expected_movement = global_movement(diff);
  const Point expected_com = center_of_mass(diff);
  REQUIRE(expected_movement > 57600);

  tracker.step(a);  // init -> searching, stores previous frame
  const StepResult r = tracker.step(b);

  CHECK(r.trace == std::vector<Mode>{Mode::searching, Mode::tracking});
  REQUIRE(r.movement.has_value());
  CHECK(*r.movement == expected_movement);
  REQUIRE(r.output());
  CHECK(r.smoothed->x == expected_com.x);
  CHECK(r.smoothed->y == expected_com.y);
  CHECK(r.smoothed->z == 0.0);
  CHECK(tracker.mode() == Mode::tracking);
}

TEST_CASE("tracking emits smoothed output and validates each frame") {
  Tracker tracker = make_tracker(0);
  std::int64_t t = 0;
  tracker.step(square_frame(40, 60, 22, t));
  // approach: move fast enough to acquire
  StepResult r;
  double cx = 40;
  for (int i = 0; i < 3; ++i) {
    t += 33;
    cx += 10;
    r = tracker.step(square_frame(cx, 60, 22, t));
    if (tracker.mode() == Mode::tracking) break;
  }
  REQUIRE(tracker.mode() == Mode::tracking);

  // steady slow motion: TRACKING -> VALIDATING -> TRACKING with output
  for (int i = 0; i < 10; ++i) {
    t += 33;
    cx += 1;
    r = tracker.step(square_frame(cx, 60, 22, t));
    REQUIRE(r.trace ==
            std::vector<Mode>{Mode::tracking, Mode::validating, Mode::tracking});
    REQUIRE(r.output());
    REQUIRE(r.estimate.has_value());
    CHECK(r.estimate->area > 0);
  }
  // smoothed x tracks the motion but lags behind raw
  CHECK(r.smoothed->x < r.raw->x);
}

TEST_CASE("idle timeout returns the tracker to searching") {
  Tracker tracker = make_tracker(0);
  std::int64_t t = 0;
  tracker.step(square_frame(40, 60, 22, t));
  double cx = 40;
  for (int i = 0; i < 3 && tracker.mode() != Mode::tracking; ++i) {
    t += 33;
    cx += 10;
    tracker.step(square_frame(cx, 60, 22, t));
  }
  REQUIRE(tracker.mode() == Mode::tracking);

  // freeze the scene; movement drops to zero
  StepResult last;
  int steps = 0;
  while (tracker.mode() == Mode::tracking && steps < 90) {
    t += 33;
    last = tracker.step(square_frame(cx, 60, 22, t));
    ++steps;
  }
  CHECK(tracker.mode() == Mode::searching);
  CHECK(last.trace == std::vector<Mode>{Mode::tracking, Mode::searching});
  // the timeout spans two seconds of frame timestamps: ~61 frames at 33ms
  CHECK(steps >= 59);
  CHECK(steps <= 63);
}

TEST_CASE("oversized projections drop the track") {
  Tracker tracker = make_tracker(0);
  std::int64_t t = 0;
  tracker.step(square_frame(80, 60, 22, t));
  double cx = 80;
  for (int i = 0; i < 3 && tracker.mode() != Mode::tracking; ++i) {
    t += 33;
    cx += 10;
    tracker.step(square_frame(cx, 60, 22, t));
  }
  REQUIRE(tracker.mode() == Mode::tracking);

  // The object balloons: the square now covers most of the screen, so the
  // estimated area exceeds 60% of 160x120 and tracking fails.
  t += 33;
  const StepResult r = tracker.step(square_frame(80, 60, 112, t));
  CHECK(r.trace == std::vector<Mode>{Mode::tracking, Mode::searching});
  CHECK_FALSE(r.output());
  CHECK(tracker.mode() == Mode::searching);
}

TEST_CASE("vanishing projections drop the track") {
  Tracker tracker = make_tracker(0);
  std::int64_t t = 0;
  tracker.step(square_frame(80, 60, 26, t));
  double cx = 80;
  for (int i = 0; i < 3 && tracker.mode() != Mode::tracking; ++i) {
    t += 33;
    cx += 10;
    tracker.step(square_frame(cx, 60, 26, t));
  }
  REQUIRE(tracker.mode() == Mode::tracking);

  // The object shrinks to a speck: area below 2% of the screen.
  t += 33;
  const StepResult r = tracker.step(square_frame(cx, 60, 4, t));
  CHECK(ends_in(r, Mode::searching));
  CHECK(tracker.mode() == Mode::searching);
}

TEST_CASE("a teleporting object walks the full recovery path") {
  Tracker tracker = make_tracker(0);
  std::int64_t t = 0;

  // Checkered background confines stray rays so the wrong-seed estimate
  // stays within the area limits and reaches VALIDATING. The cells must
  // survive the blur with Sobel magnitudes above the edge threshold.
  auto checker_square = [](double cx, double cy, std::int64_t ts) {
    Frame f(320, 240, ts);
    for (int y = 0; y < 240; ++y)
      for (int x = 0; x < 320; ++x) {
        const double sx = (x + 0.5) / 2.0 - 0.5, sy = (y + 0.5) / 2.0 - 0.5;
        const int cxi = static_cast<int>(std::max(0.0, sx)) / 16;
        const int cyi = static_cast<int>(std::max(0.0, sy)) / 16;
        std::uint8_t v = ((cxi + cyi) % 2 == 0) ? 220 : 120;
        if (std::abs(sx - cx) <= 9 && std::abs(sy - cy) <= 9) v = 20;
        f.set(x, y, v, v, v);
      }
    return f;
  };

  tracker.step(checker_square(40, 60, t));
  double cx = 40;
  while (tracker.mode() != Mode::tracking) {
    t += 33;
    cx += 14;
    REQUIRE(cx < 110);
    tracker.step(checker_square(cx, 60, t));
  }
  // settle into steady tracking
  for (int i = 0; i < 4; ++i) {
    t += 33;
    cx += 1;
    tracker.step(checker_square(cx, 60, t));
  }
  REQUIRE(tracker.mode() == Mode::tracking);

  // teleport: the square jumps 12 px, leaving the old inner point outside
  t += 33;
  cx += 12;
  const StepResult r = tracker.step(checker_square(cx, 60, t));
  CHECK(r.trace == std::vector<Mode>{Mode::tracking, Mode::validating,
                                     Mode::recovering, Mode::tracking});
  CHECK(r.output());
  CHECK(tracker.mode() == Mode::tracking);
}

TEST_CASE("step traces stay within the mode graph") {
  // Every observed transition must be an edge of the tracking state machine.
  auto legal = [](Mode a, Mode b) {
    switch (a) {
      case Mode::initializing: return b == Mode::searching;
      case Mode::searching: return b == Mode::tracking;
      case Mode::tracking: return b == Mode::validating || b == Mode::searching;
      case Mode::validating: return b == Mode::tracking || b == Mode::recovering;
      case Mode::recovering: return b == Mode::tracking || b == Mode::searching;
    }
    return false;
  };

  Tracker tracker = make_tracker();
  std::int64_t t = 0;
  double cx = 40;
  SplitMix64 rng(99);
  for (int i = 0; i < 140; ++i) {
    // erratic object: drifts, sometimes jumps, sometimes freezes
    const int move = static_cast<int>(rng.below(10));
    if (move < 5) cx += 4;
    else if (move < 7) cx += 11;
    if (cx > 120) cx = 40;
    t += 33;
    const StepResult r = tracker.step(square_frame(cx, 60, 24, t));

    REQUIRE(!r.trace.empty());
    CHECK(r.trace.size() <= 4);
    for (size_t k = 1; k < r.trace.size(); ++k) CHECK(legal(r.trace[k - 1], r.trace[k]));
    const Mode rest = r.trace.back();
    CHECK((rest == Mode::initializing || rest == Mode::searching || rest == Mode::tracking));
    CHECK(r.output() == (rest == Mode::tracking));
  }
}

TEST_CASE("smoothed output stays inside the envelope of raw outputs") {
  Tracker tracker = make_tracker(0);
  std::int64_t t = 0;
  tracker.step(square_frame(40, 60, 24, t));
  double cx = 40;
  double lo_x = 1e9, hi_x = -1e9, lo_z = 1e9, hi_z = -1e9;
  bool any = false;
  for (int i = 0; i < 60; ++i) {
    t += 33;
    cx += (tracker.mode() == Mode::tracking) ? 2 : 10;
    if (cx > 130) cx = 130;
    const StepResult r = tracker.step(square_frame(cx, 60, 24, t));
    if (!r.output()) continue;
    lo_x = std::min(lo_x, r.raw->x);
    hi_x = std::max(hi_x, r.raw->x);
    lo_z = std::min(lo_z, r.raw->z);
    hi_z = std::max(hi_z, r.raw->z);
    any = true;
    CHECK(r.smoothed->x >= lo_x - 1e-9);
    CHECK(r.smoothed->x <= hi_x + 1e-9);
    CHECK(r.smoothed->z >= lo_z - 1e-9);
    CHECK(r.smoothed->z <= hi_z + 1e-9);
  }
  CHECK(any);
}

TEST_SUITE_END();
