#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "filter.hpp"
#include "montecarlo.hpp"
#include "scenario.hpp"

namespace sere {

// Everything a tracking or evaluation run needs, read from one JSON document.
// Unknown keys are rejected so typos fail loudly instead of silently running
// with defaults.
struct RunConfig {
  std::string name = "custom";
  ScenarioConfig scenario;
  FilterConfig filter;
  EvalGrid eval;
  int mc_runs = 100;
  uint64_t seed_base = 1000;
  std::vector<double> sweep_ratios = {1.0, 0.1, 0.01};
  std::vector<double> sweep_taus = {0.1, 1.0, 6.0};
  int sweep_runs_per_cell = 10;
};

// Parses a JSON document (text) into a RunConfig. Throws ConfigParse on
// malformed JSON and SchemaViolation on unknown keys / wrong types / missing
// required fields. A top-level {"preset": "<name>"} loads the named preset,
// with any sibling keys applied on top as overrides.
RunConfig parse_config(const std::string& json_text);

// Reads and parses a config file; IoError if unreadable.
RunConfig load_config_file(const std::string& path);

// Built-in, fully specified configurations:
//   "case-study"   planar constant-velocity target with curvature-rich
//                  acceleration input, dense position fixes
//   "toa-inertial" 3-D flight, range-to-anchor plus body accelerometer
//   "tdoa-real"    3-D flight, range-difference measurements with a
//                  contaminated tail and gating enabled
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// Serializes a RunConfig back to JSON (round-trips through parse_config).
std::string config_to_json(const RunConfig& config);

}  // namespace sere
