#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sltk/image.hpp"
#include "sltk/scene.hpp"
#include "sltk/tracker.hpp"

namespace sltk::io {

// ---- still images -----------------------------------------------------------

/// Binary portable pixmap, magic "P6", maxval 255 only.
Frame read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Frame& frame);

/// Binary portable graymap, magic "P5", maxval 255 only.
GrayImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& gray);

/// P5 file interpreted as edge magnitudes.
EdgeImage read_edge_pgm(const std::string& path, int threshold = 128);

// ---- frame streams ----------------------------------------------------------

/// Raw frame container: 16-byte header (magic "SLTK", u32le width, height,
/// fps), then width*height*3 bytes per frame.
constexpr char kRawMagic[4] = {'S', 'L', 'T', 'K'};

class RawWriter {
 public:
  RawWriter(const std::string& path, int width, int height, int fps);
  ~RawWriter();
  RawWriter(const RawWriter&) = delete;
  RawWriter& operator=(const RawWriter&) = delete;

  void append(const Frame& frame);
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Ordered frame stream with synthesized timestamps round(i*1000/fps).
class FrameSource {
 public:
  virtual ~FrameSource() = default;

  /// Fills `out` and returns true, or returns false at end of stream.
  virtual bool next(Frame& out) = 0;
  virtual int width() const = 0;
  virtual int height() const = 0;
  virtual double fps() const = 0;
};

std::unique_ptr<FrameSource> open_ppm_dir(const std::string& dir, double fps);
std::unique_ptr<FrameSource> open_raw(const std::string& path);
std::unique_ptr<FrameSource> open_scene(Scene scene);

// ---- trace emission ---------------------------------------------------------

/// One record per processed frame; the jsonl/csv field set is fixed:
/// frame, t_ms, modes, movement, compensation, centroid, area, inner,
/// iters, x, y, z. Raw coordinates are carried for tests but not emitted.
struct TraceRecord {
  std::int64_t frame = 0;
  std::int64_t t_ms = 0;
  std::vector<Mode> modes;
  std::optional<std::int64_t> movement;
  std::optional<int> compensation;
  std::optional<ProjectionEstimate> estimate;
  std::optional<Coord3D> raw;
  std::optional<Coord3D> smoothed;

  static TraceRecord from(std::int64_t frame, std::int64_t t_ms, const StepResult& r);
};

enum class TraceFormat { jsonl, csv };

std::string csv_header();
std::string format_record(const TraceRecord& rec, TraceFormat format);

}  // namespace sltk::io
