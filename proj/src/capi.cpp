#include "sltk/sltk.h"

#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "sltk/config.hpp"
#include "sltk/io.hpp"
#include "sltk/scene.hpp"
#include "sltk/tracker.hpp"

namespace {

thread_local std::string g_last_error;

sltk_status to_status(sltk::Status s) {
  using S = sltk::Status;
  switch (s) {
    case S::ok: return SLTK_OK;
    case S::invalid_argument: return SLTK_ERR_INVALID_ARGUMENT;
    case S::bad_dimensions: return SLTK_ERR_BAD_DIMENSIONS;
    case S::out_of_bounds: return SLTK_ERR_OUT_OF_BOUNDS;
    case S::inner_on_edge: return SLTK_ERR_INNER_ON_EDGE;
    case S::all_zero_image: return SLTK_ERR_ALL_ZERO_IMAGE;
    case S::nonmonotonic_timestamp: return SLTK_ERR_NONMONOTONIC_TIMESTAMP;
    case S::parse_error: return SLTK_ERR_PARSE;
    case S::io_error: return SLTK_ERR_IO;
    case S::unknown_key: return SLTK_ERR_UNKNOWN_KEY;
    case S::bad_state: return SLTK_ERR_BAD_STATE;
  }
  return SLTK_ERR_BAD_STATE;
}

template <typename Fn>
sltk_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SLTK_OK;
  } catch (const sltk::Error& e) {
    g_last_error = e.what();
    return to_status(e.status());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SLTK_ERR_BAD_STATE;
  }
}

sltk_status fail(sltk_status code, const char* msg) {
  g_last_error = msg;
  return code;
}

void fill_estimate(const sltk::ProjectionEstimate& est, sltk_estimate* out) {
  out->centroid_x = est.centroid.x;
  out->centroid_y = est.centroid.y;
  out->area = est.area;
  out->inner_x = est.inner.x;
  out->inner_y = est.inner.y;
  out->iterations = est.iterations;
  out->ray_budget_exhausted = est.ray_budget_exhausted ? 1 : 0;
}

void fill_record(std::int64_t frame, std::int64_t t_ms, const sltk::StepResult& r,
                 sltk_trace_record* out) {
  std::memset(out, 0, sizeof(*out));
  out->frame = frame;
  out->t_ms = t_ms;
  out->mode_count = static_cast<int32_t>(r.trace.size());
  for (size_t i = 0; i < r.trace.size() && i < 8; ++i)
    out->modes[i] = static_cast<int32_t>(r.trace[i]);
  if (r.movement) {
    out->has_movement = 1;
    out->movement = *r.movement;
    out->compensation = r.compensation.value_or(0);
  }
  if (r.estimate) {
    out->has_estimate = 1;
    fill_estimate(*r.estimate, &out->estimate);
  }
  if (r.smoothed) {
    out->has_output = 1;
    out->x = r.smoothed->x;
    out->y = r.smoothed->y;
    out->z = r.smoothed->z;
    out->raw_x = r.raw->x;
    out->raw_y = r.raw->y;
    out->raw_z = r.raw->z;
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sltk::Error(sltk::Status::io_error, path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes a string into a caller buffer with the usual needed/cap protocol.
sltk_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf) return SLTK_OK;
  if (cap < s.size() + 1)
    return fail(SLTK_ERR_BUFFER_TOO_SMALL, "output buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return SLTK_OK;
}

}  // namespace

struct sltk_config {
  sltk::Config cfg;
};

struct sltk_tracker {
  sltk::Tracker tracker;
  std::int64_t frames = 0;
};

struct sltk_source {
  std::unique_ptr<sltk::io::FrameSource> src;
};

extern "C" {

const char* sltk_version(void) { return "0.1.0"; }

const char* sltk_status_name(sltk_status status) {
  switch (status) {
    case SLTK_OK: return "ok";
    case SLTK_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SLTK_ERR_BAD_DIMENSIONS: return "bad dimensions";
    case SLTK_ERR_OUT_OF_BOUNDS: return "out of bounds";
    case SLTK_ERR_INNER_ON_EDGE: return "inner point on edge";
    case SLTK_ERR_ALL_ZERO_IMAGE: return "all-zero image";
    case SLTK_ERR_NONMONOTONIC_TIMESTAMP: return "non-monotonic timestamp";
    case SLTK_ERR_PARSE: return "parse error";
    case SLTK_ERR_IO: return "io error";
    case SLTK_ERR_UNKNOWN_KEY: return "unknown key";
    case SLTK_ERR_BAD_STATE: return "bad state";
    case SLTK_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case SLTK_ERR_END_OF_STREAM: return "end of stream";
  }
  return "unknown";
}

const char* sltk_mode_name(sltk_mode mode) {
  return sltk::mode_name(static_cast<sltk::Mode>(mode));
}

const char* sltk_last_error(void) { return g_last_error.c_str(); }

/* ---- configuration ------------------------------------------------------ */

sltk_config* sltk_config_new(void) { return new sltk_config(); }

void sltk_config_free(sltk_config* cfg) { delete cfg; }

sltk_status sltk_config_set(sltk_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value)
    return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { cfg->cfg.set(key, value); });
}

sltk_status sltk_config_load_file(sltk_config* cfg, const char* path) {
  if (!cfg || !path) return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { cfg->cfg.load_file(path); });
}

sltk_status sltk_config_print(const sltk_config* cfg, char* buf, size_t cap,
                              size_t* needed) {
  if (!cfg) return fail(SLTK_ERR_INVALID_ARGUMENT, "null config");
  sltk_status rc = SLTK_OK;
  sltk_status guard = guarded([&] { rc = copy_out(cfg->cfg.print(), buf, cap, needed); });
  return guard != SLTK_OK ? guard : rc;
}

/* ---- tracking ------------------------------------------------------------ */

sltk_tracker* sltk_tracker_new(const sltk_config* cfg) {
  sltk::Config defaults;
  const sltk::Config& c = cfg ? cfg->cfg : defaults;
  try {
    return new sltk_tracker{sltk::Tracker(c.pipeline, c.estimator, c.tracker), 0};
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return nullptr;
  }
}

void sltk_tracker_free(sltk_tracker* tracker) { delete tracker; }

sltk_status sltk_tracker_step(sltk_tracker* tracker, const uint8_t* rgb, int32_t width,
                              int32_t height, int64_t timestamp_ms,
                              sltk_trace_record* out) {
  if (!tracker || !rgb || !out) return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  if (width < 3 || height < 3)
    return fail(SLTK_ERR_BAD_DIMENSIONS, "frames must be at least 3x3");
  return guarded([&] {
    sltk::Frame frame(width, height, timestamp_ms);
    std::memcpy(frame.rgb.data(), rgb, frame.rgb.size());
    const sltk::StepResult r = tracker->tracker.step(frame);
    fill_record(tracker->frames++, timestamp_ms, r, out);
  });
}

sltk_status sltk_tracker_subsampled(const sltk_tracker* tracker, uint8_t* rgb_out,
                                    int32_t* width, int32_t* height) {
  if (!tracker || !rgb_out) return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  const std::optional<sltk::Frame>& f = tracker->tracker.last_subsampled();
  if (!f) return fail(SLTK_ERR_BAD_STATE, "no frame has been preprocessed yet");
  std::memcpy(rgb_out, f->rgb.data(), f->rgb.size());
  if (width) *width = f->width;
  if (height) *height = f->height;
  return SLTK_OK;
}

/* ---- one-shot estimation -------------------------------------------------- */

sltk_status sltk_estimate_image(const uint8_t* magnitudes, int32_t width, int32_t height,
                                int32_t inner_x, int32_t inner_y, const char* algorithm,
                                const sltk_config* cfg, sltk_estimate* out) {
  if (!magnitudes || !algorithm || !out)
    return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  if (width < 1 || height < 1)
    return fail(SLTK_ERR_BAD_DIMENSIONS, "edge image dimensions must be positive");
  sltk::Config defaults;
  const sltk::Config& c = cfg ? cfg->cfg : defaults;
  return guarded([&] {
    sltk::EdgeImage edges(width, height, c.pipeline.edge_threshold);
    std::memcpy(edges.magnitudes.data(), magnitudes, edges.magnitudes.size());
    const sltk::Point inner{inner_x, inner_y};
    const std::string algo = algorithm;
    sltk::ProjectionEstimate est;
    if (algo == "nray") est = sltk::estimate_nray(edges, inner, c.estimator);
    else if (algo == "iter-nray") est = sltk::estimate_iter_nray(edges, inner, c.estimator);
    else if (algo == "nyray") est = sltk::estimate_iter_nyray(edges, inner, c.estimator);
    else if (algo == "nyray-raster")
      est = sltk::estimate_iter_nyray_raster(edges, inner, c.estimator);
    else
      throw sltk::Error(sltk::Status::invalid_argument,
                        "unknown algorithm '" + algo +
                            "' (expected nray, iter-nray, nyray, nyray-raster)");
    fill_estimate(est, out);
  });
}

/* ---- frame sources -------------------------------------------------------- */

sltk_status sltk_source_open_ppm_dir(const char* dir, double fps, sltk_source** out) {
  if (!dir || !out) return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new sltk_source{sltk::io::open_ppm_dir(dir, fps)}; });
}

sltk_status sltk_source_open_raw(const char* path, sltk_source** out) {
  if (!path || !out) return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new sltk_source{sltk::io::open_raw(path)}; });
}

sltk_status sltk_source_open_scene_file(const char* path, sltk_source** out) {
  if (!path || !out) return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    sltk::Scene scene(sltk::SceneScript::parse(read_text_file(path)));
    *out = new sltk_source{sltk::io::open_scene(std::move(scene))};
  });
}

void sltk_source_free(sltk_source* source) { delete source; }

int32_t sltk_source_width(const sltk_source* source) {
  return source ? source->src->width() : 0;
}

int32_t sltk_source_height(const sltk_source* source) {
  return source ? source->src->height() : 0;
}

double sltk_source_fps(const sltk_source* source) {
  return source ? source->src->fps() : 0.0;
}

sltk_status sltk_source_next(sltk_source* source, uint8_t* rgb_buf, size_t cap,
                             int64_t* timestamp_ms) {
  if (!source || !rgb_buf || !timestamp_ms)
    return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  bool got = false;
  const sltk_status rc = guarded([&] {
    sltk::Frame frame;
    got = source->src->next(frame);
    if (!got) return;
    if (cap < frame.rgb.size())
      throw sltk::Error(sltk::Status::invalid_argument, "frame buffer too small");
    std::memcpy(rgb_buf, frame.rgb.data(), frame.rgb.size());
    *timestamp_ms = frame.timestamp_ms;
  });
  if (rc != SLTK_OK) return rc;
  return got ? SLTK_OK : SLTK_ERR_END_OF_STREAM;
}

/* ---- scene synthesis ------------------------------------------------------ */

sltk_status sltk_synth_file(const char* scene_path, const char* out_path) {
  if (!scene_path || !out_path) return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    sltk::Scene scene(sltk::SceneScript::parse(read_text_file(scene_path)));
    sltk::io::RawWriter writer(out_path, scene.width(), scene.height(), scene.fps());
    for (int i = 0; i < scene.frame_count(); ++i) writer.append(scene.render_frame(i));
    writer.close();
  });
}

/* ---- trace formatting ----------------------------------------------------- */

const char* sltk_trace_csv_header(void) {
  static const std::string header = sltk::io::csv_header();
  return header.c_str();
}

sltk_status sltk_trace_format(const sltk_trace_record* rec, const char* format,
                              char* buf, size_t cap, size_t* needed) {
  if (!rec || !format) return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  const std::string fmt = format;
  if (fmt != "jsonl" && fmt != "csv")
    return fail(SLTK_ERR_INVALID_ARGUMENT, "format must be jsonl or csv");
  sltk_status rc = SLTK_OK;
  const sltk_status guard = guarded([&] {
    sltk::io::TraceRecord r;
    r.frame = rec->frame;
    r.t_ms = rec->t_ms;
    for (int i = 0; i < rec->mode_count && i < 8; ++i)
      r.modes.push_back(static_cast<sltk::Mode>(rec->modes[i]));
    if (rec->has_movement) {
      r.movement = rec->movement;
      r.compensation = rec->compensation;
    }
    if (rec->has_estimate) {
      sltk::ProjectionEstimate est;
      est.centroid = {rec->estimate.centroid_x, rec->estimate.centroid_y};
      est.area = rec->estimate.area;
      est.inner = {rec->estimate.inner_x, rec->estimate.inner_y};
      est.iterations = rec->estimate.iterations;
      est.ray_budget_exhausted = rec->estimate.ray_budget_exhausted != 0;
      r.estimate = est;
    }
    if (rec->has_output) {
      r.raw = sltk::Coord3D{rec->raw_x, rec->raw_y, rec->raw_z};
      r.smoothed = sltk::Coord3D{rec->x, rec->y, rec->z};
    }
    const sltk::io::TraceFormat f =
        fmt == "jsonl" ? sltk::io::TraceFormat::jsonl : sltk::io::TraceFormat::csv;
    rc = copy_out(sltk::io::format_record(r, f), buf, cap, needed);
  });
  return guard != SLTK_OK ? guard : rc;
}

/* ---- image helpers ---------------------------------------------------------- */

sltk_status sltk_write_ppm(const char* path, const uint8_t* rgb, int32_t width,
                           int32_t height) {
  if (!path || !rgb) return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  if (width < 1 || height < 1) return fail(SLTK_ERR_BAD_DIMENSIONS, "bad dimensions");
  return guarded([&] {
    sltk::Frame frame(width, height);
    std::memcpy(frame.rgb.data(), rgb, frame.rgb.size());
    sltk::io::write_ppm(path, frame);
  });
}

sltk_status sltk_read_pgm(const char* path, uint8_t* buf, size_t cap, int32_t* width,
                          int32_t* height) {
  if (!path || !width || !height) return fail(SLTK_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const sltk::GrayImage g = sltk::io::read_pgm(path);
    *width = g.width;
    *height = g.height;
    if (buf) {
      if (cap < g.values.size())
        throw sltk::Error(sltk::Status::invalid_argument, "pixel buffer too small");
      std::memcpy(buf, g.values.data(), g.values.size());
    }
  });
}

} /* extern "C" */
