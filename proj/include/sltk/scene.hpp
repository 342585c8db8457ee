#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sltk/image.hpp"

namespace sltk {

/// Bit raster at the tracking resolution (one byte per pixel, 0/1).
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), bits(static_cast<size_t>(w) * h, 0) {}

  bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
  std::int64_t area() const;
  Vec2 centroid() const;  // mean of set pixels; (0,0) for an empty mask
};

struct GroundTruth {
  Mask mask;       // object pixels at the subsampled resolution
  Vec2 centroid;   // mean of mask pixels
  std::int64_t area = 0;
};

/// Exact region features for an inner point: 4-connected flood fill over
/// non-edge pixels. This is the brute-force standard the estimators are
/// measured against.
struct RegionStats {
  Vec2 centroid;
  std::int64_t area = 0;
  Mask mask;
};

RegionStats flood_fill_oracle(const EdgeImage& edges, Point inner);

/// Contour band of a mask: pixels on either side of the boundary, two pixels
/// thick, so 8-connected ray traversal cannot slip through diagonally.
EdgeImage mask_to_edges(const Mask& mask, int threshold = 128);

Mask disk_mask(int width, int height, double cx, double cy, double radius);
Mask square_mask(int width, int height, double cx, double cy, double side);
/// Palm plus five finger lobes; a deliberately non-convex silhouette.
Mask hand_mask(int width, int height, double cx, double cy, double scale);

/// Recommended interior seed points, one per finger lobe (index..pinky then
/// thumb), for the given hand placement.
std::vector<Point> hand_finger_points(double cx, double cy, double scale);

enum class ShapeKind { disk, square, hand };
enum class BackgroundKind { uniform, checker };

struct SceneScript {
  int width = 320;   // capture resolution
  int height = 240;
  int fps = 30;
  int duration = 0;  // frames
  std::uint64_t seed = 1;

  BackgroundKind background = BackgroundKind::uniform;
  std::uint8_t bg_a[3] = {230, 230, 230};
  std::uint8_t bg_b[3] = {230, 230, 230};  // second checker color
  int checker_cell = 8;                    // in subsampled pixels

  ShapeKind shape = ShapeKind::disk;
  double shape_size = 30.0;  // radius / side / scale at frame 0
  std::uint8_t color[3] = {20, 20, 20};

  // Path, all in subsampled pixel units.
  Vec2 start{80.0, 60.0};
  Vec2 velocity{0.0, 0.0};
  struct Segment { int frame; Vec2 velocity; };
  std::vector<Segment> segments;           // velocity changes, by frame
  struct JumpEvent { int frame; Vec2 offset; };
  std::vector<JumpEvent> jumps;            // instantaneous displacements
  bool bounce = false;                     // reflect at frame margins
  struct SizeKey { int frame; double value; };
  std::vector<SizeKey> size_keys;          // piecewise-linear size over time

  // Effects, applied in order: motion blur / occlusion, noise, brightness jump.
  int noise_amplitude = 0;
  int motion_blur = 0;  // horizontal box kernel length in capture pixels
  struct BrightnessJump { int frame; int offset; };
  std::vector<BrightnessJump> brightness_jumps;
  struct Occlusion { int from; int to; double x, y, w, h; };  // subsampled units
  std::vector<Occlusion> occlusions;

  static SceneScript parse(const std::string& text);
  void validate() const;
};

/// Deterministic renderer: frame i is a pure function of the script.
class Scene {
 public:
  explicit Scene(SceneScript script);

  int frame_count() const { return script_.duration; }
  int width() const { return script_.width; }
  int height() const { return script_.height; }
  int fps() const { return script_.fps; }
  int subsampled_width() const { return sub_w_; }
  int subsampled_height() const { return sub_h_; }
  const SceneScript& script() const { return script_; }

  Vec2 center_at(int frame) const;
  double size_at(int frame) const;

  Frame render_frame(int frame) const;
  GroundTruth ground_truth(int frame) const;

 private:
  bool shape_contains(double sx, double sy, Vec2 center, double size) const;
  bool occluded(double sx, double sy, int frame) const;  // subsampled coords

  SceneScript script_;
  int sub_w_ = 160;
  int sub_h_ = 120;
};

}  // namespace sltk
