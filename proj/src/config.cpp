#include "sltk/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sltk/types.hpp"

namespace sltk {

namespace {

std::int64_t parse_int(const std::string& key, const std::string& value) {
  size_t pos = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(value, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != value.size())
    throw Error(Status::parse_error, key + ": expected an integer, got '" + value + "'");
  return v;
}

double parse_num(const std::string& key, const std::string& value) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != value.size())
    throw Error(Status::parse_error, key + ": expected a number, got '" + value + "'");
  return v;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ','))
    out.push_back(static_cast<int>(parse_int(key, item)));
  if (out.empty())
    throw Error(Status::parse_error, key + ": expected a comma-separated list");
  return out;
}

// Plain decimal, no exponent, no trailing zeros: 0.6 -> "0.6", 1.0 -> "1".
std::string num_to_string(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15)
    return std::to_string(static_cast<long long>(v));
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  if (key == "blur_radius") pipeline.blur_radius = static_cast<int>(parse_int(key, value));
  else if (key == "target_width") pipeline.target_width = static_cast<int>(parse_int(key, value));
  else if (key == "target_height") pipeline.target_height = static_cast<int>(parse_int(key, value));
  else if (key == "edge_threshold") pipeline.edge_threshold = static_cast<int>(parse_int(key, value));
  else if (key == "diff_distinct_values") pipeline.diff_distinct_values = static_cast<int>(parse_int(key, value));
  else if (key == "diff_compensation_cap") pipeline.diff_compensation_cap = static_cast<int>(parse_int(key, value));
  else if (key == "rays") estimator.rays = static_cast<int>(parse_int(key, value));
  else if (key == "recast_depth") estimator.recast_depth = static_cast<int>(parse_int(key, value));
  else if (key == "block_size") estimator.block_size = static_cast<int>(parse_int(key, value));
  else if (key == "max_iterations") estimator.max_iterations = static_cast<int>(parse_int(key, value));
  else if (key == "convergence_epsilon") estimator.convergence_epsilon = parse_num(key, value);
  else if (key == "ray_budget") estimator.ray_budget = static_cast<int>(parse_int(key, value));
  else if (key == "acquire_threshold") tracker.acquire_threshold = parse_int(key, value);
  else if (key == "idle_threshold") tracker.idle_threshold = parse_int(key, value);
  else if (key == "idle_timeout_ms") tracker.idle_timeout_ms = parse_int(key, value);
  else if (key == "init_delay_ms") tracker.init_delay_ms = parse_int(key, value);
  else if (key == "max_area_fraction") tracker.max_area_fraction = parse_num(key, value);
  else if (key == "min_area_fraction") tracker.min_area_fraction = parse_num(key, value);
  else if (key == "color_window") tracker.color_window = static_cast<int>(parse_int(key, value));
  else if (key == "color_threshold") tracker.color_threshold = static_cast<int>(parse_int(key, value));
  else if (key == "recovery_offsets") tracker.recovery_offsets = parse_int_list(key, value);
  else if (key == "smoothing_factor") tracker.smoothing_factor = parse_num(key, value);
  else throw Error(Status::unknown_key, "unknown config key '" + key + "'");
}

void Config::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Status::parse_error,
                  origin + " line " + std::to_string(line_no) + ": expected key = value");
    auto trim = [](std::string v) {
      const size_t a = v.find_first_not_of(" \t\r");
      const size_t b = v.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
    };
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Status::io_error, path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  load_text(buf.str(), path);
}

std::string Config::print() const {
  std::ostringstream out;
  out << "blur_radius = " << pipeline.blur_radius << "\n";
  out << "target_width = " << pipeline.target_width << "\n";
  out << "target_height = " << pipeline.target_height << "\n";
  out << "edge_threshold = " << pipeline.edge_threshold << "\n";
  out << "diff_distinct_values = " << pipeline.diff_distinct_values << "\n";
  out << "diff_compensation_cap = " << pipeline.diff_compensation_cap << "\n";
  out << "rays = " << estimator.rays << "\n";
  out << "recast_depth = " << estimator.recast_depth << "\n";
  out << "block_size = " << estimator.block_size << "\n";
  out << "max_iterations = " << estimator.max_iterations << "\n";
  out << "convergence_epsilon = " << num_to_string(estimator.convergence_epsilon) << "\n";
  out << "ray_budget = " << estimator.ray_budget << "\n";
  out << "acquire_threshold = " << tracker.acquire_threshold << "\n";
  out << "idle_threshold = " << tracker.idle_threshold << "\n";
  out << "idle_timeout_ms = " << tracker.idle_timeout_ms << "\n";
  out << "init_delay_ms = " << tracker.init_delay_ms << "\n";
  out << "max_area_fraction = " << num_to_string(tracker.max_area_fraction) << "\n";
  out << "min_area_fraction = " << num_to_string(tracker.min_area_fraction) << "\n";
  out << "color_window = " << tracker.color_window << "\n";
  out << "color_threshold = " << tracker.color_threshold << "\n";
  out << "recovery_offsets = ";
  for (size_t i = 0; i < tracker.recovery_offsets.size(); ++i)
    out << (i ? "," : "") << tracker.recovery_offsets[i];
  out << "\n";
  out << "smoothing_factor = " << num_to_string(tracker.smoothing_factor) << "\n";
  return out.str();
}

void Config::validate() const {
  pipeline.validate();
  estimator.validate();
  tracker.validate();
}

}  // namespace sltk
