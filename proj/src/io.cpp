#include "sltk/io.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "sltk/types.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace sltk::io {

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& msg) {
  throw Error(Status::io_error, path + ": " + msg);
}

[[noreturn]] void format_fail(const std::string& path, const std::string& msg) {
  throw Error(Status::parse_error, path + ": " + msg);
}

// Reads one PNM header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

struct PnmHeader {
  std::string magic;
  int width = 0, height = 0, maxval = 0;
};

PnmHeader read_pnm_header(std::istream& in, const std::string& path) {
  PnmHeader h;
  h.magic = pnm_token(in);
  const std::string w = pnm_token(in), ht = pnm_token(in), mv = pnm_token(in);
  try {
    h.width = std::stoi(w);
    h.height = std::stoi(ht);
    h.maxval = std::stoi(mv);
  } catch (const std::exception&) {
    format_fail(path, "malformed header");
  }
  if (h.width <= 0 || h.height <= 0) format_fail(path, "malformed header");
  if (h.maxval != 255)
    format_fail(path, "unsupported maxval " + std::to_string(h.maxval) +
                          " (only 255 is supported)");
  return h;
}

std::int64_t synth_timestamp(std::int64_t index, double fps) {
  return std::llround(index * 1000.0 / fps);
}

}  // namespace

Frame read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open");
  const PnmHeader h = read_pnm_header(in, path);
  if (h.magic != "P6") format_fail(path, "expected magic P6, got '" + h.magic + "'");
  Frame f(h.width, h.height);
  in.read(reinterpret_cast<char*>(f.rgb.data()), static_cast<std::streamsize>(f.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(f.rgb.size()))
    format_fail(path, "truncated pixel data");
  return f;
}

void write_ppm(const std::string& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.rgb.data()),
            static_cast<std::streamsize>(frame.rgb.size()));
  if (!out) io_fail(path, "write failed");
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open");
  const PnmHeader h = read_pnm_header(in, path);
  if (h.magic != "P5") format_fail(path, "expected magic P5, got '" + h.magic + "'");
  GrayImage g(h.width, h.height);
  in.read(reinterpret_cast<char*>(g.values.data()),
          static_cast<std::streamsize>(g.values.size()));
  if (in.gcount() != static_cast<std::streamsize>(g.values.size()))
    format_fail(path, "truncated pixel data");
  return g;
}

void write_pgm(const std::string& path, const GrayImage& gray) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  out << "P5\n" << gray.width << " " << gray.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(gray.values.data()),
            static_cast<std::streamsize>(gray.values.size()));
  if (!out) io_fail(path, "write failed");
}

EdgeImage read_edge_pgm(const std::string& path, int threshold) {
  const GrayImage g = read_pgm(path);
  EdgeImage edges(g.width, g.height, threshold);
  edges.magnitudes = g.values;
  return edges;
}

// ---- raw container ------------------------------------------------------------

namespace {

void put_u32le(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

struct RawWriter::Impl {
  std::ofstream out;
  std::string path;
  int width, height;
};

RawWriter::RawWriter(const std::string& path, int width, int height, int fps)
    : impl_(new Impl{std::ofstream(path, std::ios::binary), path, width, height}) {
  if (!impl_->out) io_fail(path, "cannot open for writing");
  if (width <= 0 || height <= 0 || fps <= 0)
    throw Error(Status::invalid_argument, "raw container needs positive dimensions and fps");
  impl_->out.write(kRawMagic, 4);
  put_u32le(impl_->out, static_cast<std::uint32_t>(width));
  put_u32le(impl_->out, static_cast<std::uint32_t>(height));
  put_u32le(impl_->out, static_cast<std::uint32_t>(fps));
}

RawWriter::~RawWriter() = default;

void RawWriter::append(const Frame& frame) {
  if (frame.width != impl_->width || frame.height != impl_->height)
    throw Error(Status::bad_dimensions, impl_->path + ": frame dimensions changed mid-stream");
  impl_->out.write(reinterpret_cast<const char*>(frame.rgb.data()),
                   static_cast<std::streamsize>(frame.rgb.size()));
}

void RawWriter::close() {
  impl_->out.close();
  if (!impl_->out) io_fail(impl_->path, "write failed");
}

// ---- frame sources --------------------------------------------------------------

namespace {

class PpmDirSource final : public FrameSource {
 public:
  PpmDirSource(const std::string& dir, double fps) : fps_(fps) {
    if (fps <= 0) throw Error(Status::invalid_argument, "fps must be positive");
    if (!fs::is_directory(dir)) io_fail(dir, "not a directory");
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
      if (ext == ".ppm") paths_.push_back(entry.path().string());
    }
    if (paths_.empty()) io_fail(dir, "contains no .ppm frames");
    std::sort(paths_.begin(), paths_.end());
    const Frame first = read_ppm(paths_.front());
    width_ = first.width;
    height_ = first.height;
  }

  bool next(Frame& out) override {
    if (index_ >= static_cast<std::int64_t>(paths_.size())) return false;
    out = read_ppm(paths_[index_]);
    if (out.width != width_ || out.height != height_)
      throw Error(Status::bad_dimensions,
                  paths_[index_] + ": frame dimensions differ from the first frame");
    out.timestamp_ms = synth_timestamp(index_, fps_);
    ++index_;
    return true;
  }

  int width() const override { return width_; }
  int height() const override { return height_; }
  double fps() const override { return fps_; }

 private:
  std::vector<std::string> paths_;
  std::int64_t index_ = 0;
  int width_ = 0, height_ = 0;
  double fps_;
};

class RawSource final : public FrameSource {
 public:
  explicit RawSource(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) io_fail(path, "cannot open");
    unsigned char header[16];
    in_.read(reinterpret_cast<char*>(header), 16);
    if (in_.gcount() != 16 || std::memcmp(header, kRawMagic, 4) != 0)
      format_fail(path, "malformed header (need 16 bytes starting with \"SLTK\")");
    width_ = static_cast<int>(get_u32le(header + 4));
    height_ = static_cast<int>(get_u32le(header + 8));
    fps_ = static_cast<int>(get_u32le(header + 12));
    if (width_ <= 0 || height_ <= 0 || fps_ <= 0)
      format_fail(path, "malformed header (zero dimension or fps)");
    frame_bytes_ = static_cast<std::int64_t>(width_) * height_ * 3;
    const std::int64_t payload = static_cast<std::int64_t>(fs::file_size(path)) - 16;
    if (payload % frame_bytes_ != 0)
      format_fail(path, "truncated frame at offset " +
                            std::to_string(16 + (payload / frame_bytes_) * frame_bytes_));
    count_ = payload / frame_bytes_;
  }

  bool next(Frame& out) override {
    if (index_ >= count_) return false;
    out = Frame(width_, height_, synth_timestamp(index_, fps_));
    in_.read(reinterpret_cast<char*>(out.rgb.data()), frame_bytes_);
    if (in_.gcount() != frame_bytes_)
      format_fail(path_, "truncated frame at offset " +
                             std::to_string(16 + index_ * frame_bytes_));
    ++index_;
    return true;
  }

  int width() const override { return width_; }
  int height() const override { return height_; }
  double fps() const override { return fps_; }

 private:
  std::string path_;
  std::ifstream in_;
  int width_ = 0, height_ = 0, fps_ = 0;
  std::int64_t frame_bytes_ = 0, count_ = 0, index_ = 0;
};

class SceneSource final : public FrameSource {
 public:
  explicit SceneSource(Scene scene) : scene_(std::move(scene)) {}

  bool next(Frame& out) override {
    if (index_ >= scene_.frame_count()) return false;
    out = scene_.render_frame(static_cast<int>(index_));
    out.timestamp_ms = synth_timestamp(index_, scene_.fps());
    ++index_;
    return true;
  }

  int width() const override { return scene_.width(); }
  int height() const override { return scene_.height(); }
  double fps() const override { return scene_.fps(); }

 private:
  Scene scene_;
  std::int64_t index_ = 0;
};

}  // namespace

std::unique_ptr<FrameSource> open_ppm_dir(const std::string& dir, double fps) {
  return std::make_unique<PpmDirSource>(dir, fps);
}

std::unique_ptr<FrameSource> open_raw(const std::string& path) {
  return std::make_unique<RawSource>(path);
}

std::unique_ptr<FrameSource> open_scene(Scene scene) {
  return std::make_unique<SceneSource>(std::move(scene));
}

// ---- trace emission --------------------------------------------------------------

TraceRecord TraceRecord::from(std::int64_t frame, std::int64_t t_ms, const StepResult& r) {
  TraceRecord rec;
  rec.frame = frame;
  rec.t_ms = t_ms;
  rec.modes = r.trace;
  rec.movement = r.movement;
  rec.compensation = r.compensation;
  rec.estimate = r.estimate;
  rec.raw = r.raw;
  rec.smoothed = r.smoothed;
  return rec;
}

std::string csv_header() {
  return "frame,t_ms,modes,movement,compensation,centroid,area,inner,iters,x,y,z";
}

namespace {

std::string num(double v) { return ordered_json(v).dump(); }

}  // namespace

std::string format_record(const TraceRecord& rec, TraceFormat format) {
  if (format == TraceFormat::jsonl) {
    ordered_json j;
    j["frame"] = rec.frame;
    j["t_ms"] = rec.t_ms;
    ordered_json modes = ordered_json::array();
    for (Mode m : rec.modes) modes.push_back(mode_name(m));
    j["modes"] = std::move(modes);
    j["movement"] = rec.movement ? ordered_json(*rec.movement) : ordered_json(nullptr);
    j["compensation"] =
        rec.compensation ? ordered_json(*rec.compensation) : ordered_json(nullptr);
    if (rec.estimate) {
      j["centroid"] = {rec.estimate->centroid.x, rec.estimate->centroid.y};
      j["area"] = rec.estimate->area;
      j["inner"] = {rec.estimate->inner.x, rec.estimate->inner.y};
      j["iters"] = rec.estimate->iterations;
    } else {
      j["centroid"] = nullptr;
      j["area"] = nullptr;
      j["inner"] = nullptr;
      j["iters"] = nullptr;
    }
    if (rec.smoothed) {
      j["x"] = rec.smoothed->x;
      j["y"] = rec.smoothed->y;
      j["z"] = rec.smoothed->z;
    } else {
      j["x"] = nullptr;
      j["y"] = nullptr;
      j["z"] = nullptr;
    }
    return j.dump();
  }

  // csv: same column order, empty cells for absent values
  std::ostringstream out;
  out << rec.frame << ',' << rec.t_ms << ',';
  for (size_t i = 0; i < rec.modes.size(); ++i)
    out << (i ? " " : "") << mode_name(rec.modes[i]);
  out << ',';
  if (rec.movement) out << *rec.movement;
  out << ',';
  if (rec.compensation) out << *rec.compensation;
  out << ',';
  if (rec.estimate) out << rec.estimate->centroid.x << ' ' << rec.estimate->centroid.y;
  out << ',';
  if (rec.estimate) out << num(rec.estimate->area);
  out << ',';
  if (rec.estimate) out << rec.estimate->inner.x << ' ' << rec.estimate->inner.y;
  out << ',';
  if (rec.estimate) out << rec.estimate->iterations;
  out << ',';
  if (rec.smoothed) out << num(rec.smoothed->x);
  out << ',';
  if (rec.smoothed) out << num(rec.smoothed->y);
  out << ',';
  if (rec.smoothed) out << num(rec.smoothed->z);
  return out.str();
}

}  // namespace sltk::io
