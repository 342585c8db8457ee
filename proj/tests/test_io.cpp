#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sltk/config.hpp"
#include "sltk/io.hpp"
#include "sltk/scene.hpp"
#include "sltk/types.hpp"

using namespace sltk;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sltk-io-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int counter;
};
int TempDir::counter = 0;

Frame test_frame(int w, int h, std::uint64_t seed) {
  Frame f(w, h);
  SplitMix64 rng(seed);
  for (auto& v : f.rgb) v = static_cast<std::uint8_t>(rng.below(256));
  return f;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("ppm round trip preserves every byte") {
  TempDir dir;
  const Frame f = test_frame(33, 21, 7);
  io::write_ppm(dir.file("a.ppm"), f);
  const Frame g = io::read_ppm(dir.file("a.ppm"));
  CHECK(g.width == 33);
  CHECK(g.height == 21);
  CHECK(g.rgb == f.rgb);
}

TEST_CASE("ppm reader rejects unsupported maxval") {
  TempDir dir;
  std::ofstream out(dir.file("deep.ppm"), std::ios::binary);
  out << "P6\n2 2\n65535\n";
  for (int i = 0; i < 24; ++i) out.put('\0');
  out.close();
  try {
    io::read_ppm(dir.file("deep.ppm"));
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.status() == Status::parse_error);
    CHECK(std::string(e.what()).find("maxval") != std::string::npos);
  }
}

TEST_CASE("ppm reader reports wrong magic and truncation") {
  TempDir dir;
  {
    std::ofstream out(dir.file("gray.pgm"), std::ios::binary);
    out << "P5\n2 2\n255\nabcd";
  }
  CHECK_THROWS_AS(io::read_ppm(dir.file("gray.pgm")), Error);

  {
    std::ofstream out(dir.file("short.ppm"), std::ios::binary);
    out << "P6\n4 4\n255\nxyz";
  }
  CHECK_THROWS_AS(io::read_ppm(dir.file("short.ppm")), Error);
}

TEST_CASE("pgm round trip and comment handling") {
  TempDir dir;
  GrayImage g(5, 4);
  for (size_t i = 0; i < g.values.size(); ++i) g.values[i] = static_cast<std::uint8_t>(7 * i);
  io::write_pgm(dir.file("g.pgm"), g);
  CHECK(io::read_pgm(dir.file("g.pgm")).values == g.values);

  // comments between header tokens are legal PNM
  std::ofstream out(dir.file("c.pgm"), std::ios::binary);
  out << "P5\n# a comment\n2 # width then height\n1\n255\n";
  out.put(static_cast<char>(200));
  out.put(static_cast<char>(100));
  out.close();
  const GrayImage c = io::read_pgm(dir.file("c.pgm"));
  CHECK(c.width == 2);
  CHECK(c.height == 1);
  CHECK(c.values[0] == 200);

  const EdgeImage e = io::read_edge_pgm(dir.file("c.pgm"));
  CHECK(e.is_edge(0, 0));
  CHECK_FALSE(e.is_edge(1, 0));
}

TEST_CASE("raw container round trip with synthesized timestamps") {
  TempDir dir;
  const std::string path = dir.file("clip.sltk");
  {
    io::RawWriter writer(path, 16, 12, 30);
    for (int i = 0; i < 5; ++i) writer.append(test_frame(16, 12, 100 + i));
    writer.close();
  }
  auto source = io::open_raw(path);
  CHECK(source->width() == 16);
  CHECK(source->height() == 12);
  CHECK(source->fps() == 30.0);
  Frame f;
  int count = 0;
  std::int64_t prev_t = -1;
  while (source->next(f)) {
    CHECK(f.rgb == test_frame(16, 12, 100 + count).rgb);
    CHECK(f.timestamp_ms == std::llround(count * 1000.0 / 30.0));
    CHECK(f.timestamp_ms > prev_t);
    prev_t = f.timestamp_ms;
    ++count;
  }
  CHECK(count == 5);
}

TEST_CASE("raw container rejects malformed headers and truncated frames") {
  TempDir dir;
  {
    std::ofstream out(dir.file("bad.sltk"), std::ios::binary);
    out << "NOPE";
  }
  try {
    io::open_raw(dir.file("bad.sltk"));
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.status() == Status::parse_error);
  }

  {
    io::RawWriter writer(dir.file("trunc.sltk"), 8, 8, 10);
    writer.append(test_frame(8, 8, 1));
    writer.close();
    std::ofstream out(dir.file("trunc.sltk"), std::ios::binary | std::ios::app);
    out << "partial frame bytes";
  }
  try {
    io::open_raw(dir.file("trunc.sltk"));
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
}

TEST_CASE("ppm directories stream in filename order") {
  TempDir dir;
  for (int i = 1; i <= 10; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.ppm", i);
    io::write_ppm(dir.file(name), test_frame(8, 6, i));
  }
  auto source = io::open_ppm_dir(dir.path.string(), 25.0);
  Frame f;
  int count = 0;
  while (source->next(f)) {
    CHECK(f.rgb == test_frame(8, 6, count + 1).rgb);
    CHECK(f.timestamp_ms == count * 40);
    ++count;
  }
  CHECK(count == 10);
}

TEST_CASE("ppm directories validate dimensions and emptiness") {
  TempDir dir;
  CHECK_THROWS_AS(io::open_ppm_dir(dir.path.string(), 30.0), Error);
  io::write_ppm(dir.file("000001.ppm"), test_frame(8, 6, 1));
  io::write_ppm(dir.file("000002.ppm"), test_frame(10, 6, 2));
  auto source = io::open_ppm_dir(dir.path.string(), 30.0);
  Frame f;
  CHECK(source->next(f));
  CHECK_THROWS_AS(source->next(f), Error);  // second frame has other dimensions
}

TEST_CASE("scene sources replay the renderer exactly") {
  const char* script =
      "duration = 4\nfps = 20\nwidth = 320\nheight = 240\n"
      "object = disk 10\ncolor = 5 5 5\ncenter = 40 40\n";
  Scene scene(SceneScript::parse(script));
  auto source = io::open_scene(Scene(SceneScript::parse(script)));
  Frame f;
  int i = 0;
  while (source->next(f)) {
    CHECK(f.rgb == scene.render_frame(i).rgb);
    CHECK(f.timestamp_ms == i * 50);
    ++i;
  }
  CHECK(i == 4);
}

TEST_CASE("jsonl records carry the full schema with nulls for absences") {
  io::TraceRecord rec;
  rec.frame = 3;
  rec.t_ms = 99;
  rec.modes = {Mode::searching};
  const std::string searching = io::format_record(rec, io::TraceFormat::jsonl);
  CHECK(searching ==
        R"({"frame":3,"t_ms":99,"modes":["SEARCHING"],"movement":null,"compensation":null,)"
        R"("centroid":null,"area":null,"inner":null,"iters":null,"x":null,"y":null,"z":null})");

  rec.modes = {Mode::tracking, Mode::validating, Mode::tracking};
  rec.movement = 12345;
  rec.compensation = 7;
  ProjectionEstimate est;
  est.centroid = {80, 61};
  est.area = 1024.0;
  est.inner = {79, 60};
  est.iterations = 2;
  rec.estimate = est;
  rec.raw = Coord3D{80, 61, 0.5};
  rec.smoothed = Coord3D{80.5, 60.9, 0.05};
  const std::string tracking = io::format_record(rec, io::TraceFormat::jsonl);
  CHECK(tracking.find("\"modes\":[\"TRACKING\",\"VALIDATING\",\"TRACKING\"]") !=
        std::string::npos);
  CHECK(tracking.find("\"movement\":12345") != std::string::npos);
  CHECK(tracking.find("\"centroid\":[80,61]") != std::string::npos);
  CHECK(tracking.find("\"area\":1024.0") != std::string::npos);
  CHECK(tracking.find("\"z\":0.05") != std::string::npos);
}

TEST_CASE("csv rows follow the header column order") {
  CHECK(io::csv_header() ==
        "frame,t_ms,modes,movement,compensation,centroid,area,inner,iters,x,y,z");

  io::TraceRecord rec;
  rec.frame = 0;
  rec.t_ms = 0;
  rec.modes = {Mode::initializing};
  CHECK(io::format_record(rec, io::TraceFormat::csv) == "0,0,INITIALIZING,,,,,,,,,");

  rec.modes = {Mode::searching, Mode::tracking};
  rec.movement = 60000;
  rec.compensation = 0;
  rec.raw = Coord3D{80, 60, 0};
  rec.smoothed = Coord3D{80, 60, 0};
  const std::string row = io::format_record(rec, io::TraceFormat::csv);
  CHECK(row == "0,0,SEARCHING TRACKING,60000,0,,,,,80.0,60.0,0.0");
}

TEST_CASE("one record per frame") {
  const char* script =
      "duration = 12\nfps = 30\nwidth = 320\nheight = 240\n"
      "object = disk 12\ncolor = 20 20 20\ncenter = 60 60\n";
  auto source = io::open_scene(Scene(SceneScript::parse(script)));
  Tracker tracker{PipelineConfig{}, EstimatorConfig{}, TrackerConfig{}};
  Frame f;
  int lines = 0;
  while (source->next(f)) {
    const io::TraceRecord rec =
        io::TraceRecord::from(lines, f.timestamp_ms, tracker.step(f));
    CHECK_FALSE(io::format_record(rec, io::TraceFormat::jsonl).empty());
    ++lines;
  }
  CHECK(lines == 12);
}

TEST_CASE("config files and overrides reach every constant") {
  Config cfg;
  cfg.load_text(
      "# tuned for a quick test\n"
      "blur_radius = 3\n"
      "rays = 32\n"
      "recovery_offsets = 5,10,15\n"
      "smoothing_factor = 0.5\n");
  CHECK(cfg.pipeline.blur_radius == 3);
  CHECK(cfg.estimator.rays == 32);
  CHECK(cfg.tracker.recovery_offsets == std::vector<int>{5, 10, 15});
  CHECK(cfg.tracker.smoothing_factor == 0.5);

  CHECK_THROWS_AS(cfg.set("unknown_thing", "1"), Error);
  CHECK_THROWS_AS(cfg.set("rays", "many"), Error);
  try {
    cfg.set("no_such_key", "0");
  } catch (const Error& e) {
    CHECK(e.status() == Status::unknown_key);
  }
}

TEST_CASE("printed config lists the documented defaults") {
  const std::string text = Config{}.print();
  CHECK(text ==
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
        "smoothing_factor = 0.9\n");
}

TEST_SUITE_END();
