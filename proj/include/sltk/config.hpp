#pragma once

#include <string>

#include "sltk/estimators.hpp"
#include "sltk/pipeline.hpp"
#include "sltk/tracker.hpp"

namespace sltk {

/// Every tunable constant in one flat record. Keys are the ones accepted by
/// config files, `--set`, and the C API; print() lists them in a stable order.
struct Config {
  PipelineConfig pipeline;
  EstimatorConfig estimator;
  TrackerConfig tracker;

  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  void load_text(const std::string& text, const std::string& origin = "<config>");
  std::string print() const;
  void validate() const;
};

}  // namespace sltk
