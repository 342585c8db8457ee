// sltk command line: track objects in frame streams, run one-shot estimator
// comparisons, synthesize test scenes, and self-check the installation.
// Talks to the engine exclusively through the C API in sltk/sltk.h.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sltk/sltk.h"

namespace {

struct ConfigHandle {
  sltk_config* cfg = sltk_config_new();
  ~ConfigHandle() { sltk_config_free(cfg); }
};

[[noreturn]] void die(const std::string& msg) {
  std::fprintf(stderr, "sltk: %s\n", msg.c_str());
  std::exit(1);
}

void check(sltk_status rc, const std::string& context) {
  if (rc != SLTK_OK)
    die(context + ": " + sltk_status_name(rc) + " (" + sltk_last_error() + ")");
}

void apply_config(ConfigHandle& cfg, const std::string& file,
                  const std::vector<std::string>& sets) {
  if (!file.empty()) check(sltk_config_load_file(cfg.cfg, file.c_str()), file);
  for (const std::string& kv : sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) die("--set expects key=value, got '" + kv + "'");
    check(sltk_config_set(cfg.cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()),
          "--set " + kv);
  }
}

std::string print_config(const ConfigHandle& cfg) {
  size_t needed = 0;
  sltk_config_print(cfg.cfg, nullptr, 0, &needed);
  std::string buf(needed, '\0');
  check(sltk_config_print(cfg.cfg, buf.data(), buf.size(), &needed), "print config");
  buf.resize(needed - 1);
  return buf;
}

std::string format_trace(const sltk_trace_record& rec, const std::string& format) {
  size_t needed = 0;
  sltk_trace_format(&rec, format.c_str(), nullptr, 0, &needed);
  std::string line(needed, '\0');
  check(sltk_trace_format(&rec, format.c_str(), line.data(), line.size(), &needed),
        "format trace");
  line.resize(needed - 1);
  return line;
}

struct SourceHandle {
  sltk_source* src = nullptr;
  ~SourceHandle() { sltk_source_free(src); }
};

void open_source(SourceHandle& out, const std::string& ppm_dir, const std::string& raw,
                 const std::string& scene, double fps) {
  const int given = (!ppm_dir.empty()) + (!raw.empty()) + (!scene.empty());
  if (given == 0) die("no frame source: use --ppm-dir, --raw or --scene");
  if (given > 1) die("conflicting frame sources: pick one of --ppm-dir, --raw, --scene");
  if (!ppm_dir.empty())
    check(sltk_source_open_ppm_dir(ppm_dir.c_str(), fps, &out.src), ppm_dir);
  else if (!raw.empty())
    check(sltk_source_open_raw(raw.c_str(), &out.src), raw);
  else
    check(sltk_source_open_scene_file(scene.c_str(), &out.src), scene);
}

void draw_marker(std::vector<uint8_t>& rgb, int w, int h, int cx, int cy, uint8_t r,
                 uint8_t g, uint8_t b) {
  auto put = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    uint8_t* p = rgb.data() + (static_cast<size_t>(y) * w + x) * 3;
    p[0] = r;
    p[1] = g;
    p[2] = b;
  };
  for (int d = -4; d <= 4; ++d) {
    put(cx + d, cy);
    put(cx, cy + d);
  }
}

int cmd_track(const std::string& ppm_dir, const std::string& raw, const std::string& scene,
              double fps, const std::string& format, const std::string& config_file,
              const std::vector<std::string>& sets, bool print_cfg,
              const std::string& dump_dir) {
  ConfigHandle cfg;
  apply_config(cfg, config_file, sets);
  if (print_cfg) {
    std::fputs(print_config(cfg).c_str(), stdout);
    return 0;
  }

  SourceHandle source;
  open_source(source, ppm_dir, raw, scene, fps);
  const int w = sltk_source_width(source.src);
  const int h = sltk_source_height(source.src);

  sltk_tracker* tracker = sltk_tracker_new(cfg.cfg);
  if (!tracker) die(std::string("tracker setup failed: ") + sltk_last_error());
  std::unique_ptr<sltk_tracker, decltype(&sltk_tracker_free)> tracker_guard(
      tracker, sltk_tracker_free);

  if (!dump_dir.empty()) std::filesystem::create_directories(dump_dir);
  if (format == "csv") std::printf("%s\n", sltk_trace_csv_header());

  std::vector<uint8_t> frame(static_cast<size_t>(w) * h * 3);
  std::vector<uint8_t> sub(static_cast<size_t>(w) * h * 3);
  int64_t t_ms = 0;
  int64_t index = 0;
  while (true) {
    const sltk_status rc = sltk_source_next(source.src, frame.data(), frame.size(), &t_ms);
    if (rc == SLTK_ERR_END_OF_STREAM) break;
    check(rc, "read frame " + std::to_string(index));

    sltk_trace_record rec;
    check(sltk_tracker_step(tracker, frame.data(), w, h, t_ms, &rec),
          "frame " + std::to_string(index));
    std::printf("%s\n", format_trace(rec, format).c_str());

    if (!dump_dir.empty()) {
      int32_t sw = 0, sh = 0;
      if (sltk_tracker_subsampled(tracker, sub.data(), &sw, &sh) == SLTK_OK) {
        if (rec.has_estimate) {
          draw_marker(sub, sw, sh, rec.estimate.inner_x, rec.estimate.inner_y, 255, 0, 0);
          draw_marker(sub, sw, sh, rec.estimate.centroid_x, rec.estimate.centroid_y, 0,
                      255, 0);
        }
        char name[32];
        std::snprintf(name, sizeof(name), "%06" PRId64 ".ppm", index);
        check(sltk_write_ppm((std::filesystem::path(dump_dir) / name).string().c_str(),
                             sub.data(), sw, sh),
              "dump frame");
      }
    }
    ++index;
  }
  return 0;
}

int cmd_estimate(const std::string& edges_path, const std::string& inner,
                 const std::string& algo, const std::string& config_file,
                 const std::vector<std::string>& sets) {
  ConfigHandle cfg;
  apply_config(cfg, config_file, sets);

  int32_t w = 0, h = 0;
  check(sltk_read_pgm(edges_path.c_str(), nullptr, 0, &w, &h), edges_path);
  std::vector<uint8_t> mag(static_cast<size_t>(w) * h);
  check(sltk_read_pgm(edges_path.c_str(), mag.data(), mag.size(), &w, &h), edges_path);

  int ix = 0, iy = 0;
  if (std::sscanf(inner.c_str(), "%d,%d", &ix, &iy) != 2)
    die("--inner expects X,Y, got '" + inner + "'");

  sltk_estimate est;
  check(sltk_estimate_image(mag.data(), w, h, ix, iy, algo.c_str(), cfg.cfg, &est),
        "estimate");
  std::printf(
      "{\"algo\":\"%s\",\"centroid\":[%d,%d],\"area\":%.17g,\"inner\":[%d,%d],"
      "\"iters\":%d,\"ray_budget_exhausted\":%s}\n",
      algo.c_str(), est.centroid_x, est.centroid_y, est.area, est.inner_x, est.inner_y,
      est.iterations, est.ray_budget_exhausted ? "true" : "false");
  return 0;
}

int cmd_synth(const std::string& scene, const std::string& out) {
  check(sltk_synth_file(scene.c_str(), out.c_str()), scene);
  return 0;
}

// ---- selftest -----------------------------------------------------------------

int g_failures = 0;

void report(bool ok, const std::string& name) {
  std::printf("%s - %s\n", ok ? "ok  " : "FAIL", name.c_str());
  if (!ok) ++g_failures;
}

// Edge-band circle drawn directly into a magnitude buffer.
std::vector<uint8_t> circle_magnitudes(int w, int h, int cx, int cy, int r) {
  std::vector<uint8_t> mag(static_cast<size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = std::sqrt(double(x - cx) * (x - cx) + double(y - cy) * (y - cy));
      if (std::abs(d - r) <= 1.0) mag[static_cast<size_t>(y) * w + x] = 255;
    }
  }
  return mag;
}

std::string run_scene_trace(const std::string& scene_path) {
  SourceHandle source;
  check(sltk_source_open_scene_file(scene_path.c_str(), &source.src), scene_path);
  const int w = sltk_source_width(source.src);
  const int h = sltk_source_height(source.src);
  sltk_tracker* tracker = sltk_tracker_new(nullptr);
  if (!tracker) die(std::string("tracker setup failed: ") + sltk_last_error());
  std::unique_ptr<sltk_tracker, decltype(&sltk_tracker_free)> guard(tracker,
                                                                    sltk_tracker_free);
  std::vector<uint8_t> frame(static_cast<size_t>(w) * h * 3);
  int64_t t = 0;
  std::string out;
  while (sltk_source_next(source.src, frame.data(), frame.size(), &t) == SLTK_OK) {
    sltk_trace_record rec;
    check(sltk_tracker_step(tracker, frame.data(), w, h, t, &rec), "selftest step");
    out += format_trace(rec, "jsonl");
    out += '\n';
  }
  return out;
}

int cmd_selftest() {
  // Documented defaults, verbatim.
  {
    ConfigHandle cfg;
    const std::string expected =
        "blur_radius = 5\n"
        "target_width = 160\n"
        "target_height = 120\n"
        "edge_threshold = 128\n"
        "diff_distinct_values = 10\n"
        "diff_compensation_cap = 64\n"
        "rays = 16\n"
        "recast_depth = 2\n"
        "block_size = 8\n"
        "max_iterations = 10\n"
        "convergence_epsilon = 1\n"
        "ray_budget = 65536\n"
        "acquire_threshold = 57600\n"
        "idle_threshold = 4800\n"
        "idle_timeout_ms = 2000\n"
        "init_delay_ms = 2000\n"
        "max_area_fraction = 0.6\n"
        "min_area_fraction = 0.02\n"
        "color_window = 5\n"
        "color_threshold = 90\n"
        "recovery_offsets = 10,20\n"
        "smoothing_factor = 0.9\n";
    report(print_config(cfg) == expected, "default configuration matches documentation");
  }

  // Estimator sanity on a synthetic edge circle.
  {
    const int w = 160, h = 120;
    std::vector<uint8_t> mag = circle_magnitudes(w, h, 80, 60, 30);
    sltk_estimate a, b;
    const sltk_status rc1 =
        sltk_estimate_image(mag.data(), w, h, 80, 60, "nyray-raster", nullptr, &a);
    const sltk_status rc2 =
        sltk_estimate_image(mag.data(), w, h, 80, 60, "nyray-raster", nullptr, &b);
    report(rc1 == SLTK_OK && rc2 == SLTK_OK && std::memcmp(&a, &b, sizeof a) == 0,
           "estimation is deterministic");
    report(rc1 == SLTK_OK && std::abs(a.centroid_x - 80) <= 3 &&
               std::abs(a.centroid_y - 60) <= 3,
           "circle centroid lands near the center");
    report(rc1 == SLTK_OK && a.area > 1500 && a.area < 4500,
           "circle area is in a plausible range");
    report(rc1 == SLTK_OK && mag[static_cast<size_t>(a.inner_y) * w + a.inner_x] <= 128,
           "relocated inner point is not an edge pixel");

    // recast depth 1 must collapse to plain iterative casting
    ConfigHandle flat;
    check(sltk_config_set(flat.cfg, "recast_depth", "1"), "set recast_depth");
    sltk_estimate c, d;
    const sltk_status rc3 =
        sltk_estimate_image(mag.data(), w, h, 70, 55, "nyray", flat.cfg, &c);
    const sltk_status rc4 =
        sltk_estimate_image(mag.data(), w, h, 70, 55, "iter-nray", flat.cfg, &d);
    report(rc3 == SLTK_OK && rc4 == SLTK_OK && std::memcmp(&c, &d, sizeof c) == 0,
           "single-level recasting equals iterative casting");
  }

  // Tracker conformance and replay determinism on a small scene.
  {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "sltk-selftest";
    fs::create_directories(dir);
    const fs::path scene_path = dir / "selftest.scene";
    {
      std::ofstream scene(scene_path);
      scene << "duration = 90\nfps = 30\nwidth = 320\nheight = 240\nseed = 7\n"
               "background = uniform 230 230 230\nobject = disk 24\ncolor = 20 20 20\n"
               "center = 60 60\nvelocity = 0 0\nsegment = 65 3 0\nbounce = 1\n";
    }
    const std::string trace1 = run_scene_trace(scene_path.string());
    const std::string trace2 = run_scene_trace(scene_path.string());
    report(!trace1.empty() && trace1 == trace2, "replay produces byte-identical traces");

    bool tracked = false, legal = true;
    size_t pos = 0;
    while ((pos = trace1.find("\"modes\":[", pos)) != std::string::npos) {
      const size_t end = trace1.find(']', pos);
      const std::string modes = trace1.substr(pos, end - pos);
      if (modes.find("TRACKING") != std::string::npos) tracked = true;
      if (modes.find("VALIDATING\"]") != std::string::npos ||
          modes.find("RECOVERING\"]") != std::string::npos)
        legal = false;  // transient modes must not be final
      pos = end;
    }
    report(tracked, "scene tracker reaches TRACKING");
    report(legal, "transient modes never end a step");
    fs::remove_all(dir);
  }

  std::printf("%s\n", g_failures == 0 ? "selftest passed" : "selftest FAILED");
  return g_failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sltk - markerless monocular 3D motion tracking"};
  app.require_subcommand(1);

  // track
  std::string ppm_dir, raw, scene, format = "jsonl", config_file, dump_dir;
  double fps = 30.0;
  std::vector<std::string> sets;
  bool print_cfg = false;
  CLI::App* track = app.add_subcommand("track", "track a frame stream and emit a trace");
  track->add_option("--ppm-dir", ppm_dir, "directory of numbered P6 .ppm frames");
  track->add_option("--raw", raw, "SLTK raw container file");
  track->add_option("--scene", scene, "scene script to render and track");
  track->add_option("--fps", fps, "frame rate for --ppm-dir sources (default 30)");
  track->add_option("--format", format, "jsonl or csv (default jsonl)")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  track->add_option("--config", config_file, "flat key=value config file");
  track->add_option("--set", sets, "override one config key (key=value, repeatable)");
  track->add_flag("--print-config", print_cfg, "print the effective config and exit");
  track->add_option("--dump-dir", dump_dir, "write annotated subsampled frames here");

  // estimate
  std::string edges_path, inner = "80,60", algo = "nyray-raster";
  std::string est_config;
  std::vector<std::string> est_sets;
  CLI::App* estimate =
      app.add_subcommand("estimate", "one-shot projection feature estimation");
  estimate->add_option("--edges", edges_path, "P5 .pgm edge-magnitude image")->required();
  estimate->add_option("--inner", inner, "inner point as X,Y")->required();
  estimate->add_option("--algo", algo, "nray | iter-nray | nyray | nyray-raster");
  estimate->add_option("--config", est_config, "flat key=value config file");
  estimate->add_option("--set", est_sets, "override one config key (repeatable)");

  // synth
  std::string synth_scene, synth_out;
  CLI::App* synth = app.add_subcommand("synth", "render a scene script to a raw stream");
  synth->add_option("--scene", synth_scene, "scene script file")->required();
  synth->add_option("--out", synth_out, "output SLTK container path")->required();

  // selftest
  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in invariant suite");

  CLI11_PARSE(app, argc, argv);

  if (track->parsed())
    return cmd_track(ppm_dir, raw, scene, fps, format, config_file, sets, print_cfg,
                     dump_dir);
  if (estimate->parsed()) return cmd_estimate(edges_path, inner, algo, est_config, est_sets);
  if (synth->parsed()) return cmd_synth(synth_scene, synth_out);
  if (selftest->parsed()) return cmd_selftest();
  return 2;
}
