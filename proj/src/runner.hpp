#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "config.hpp"

namespace sere {

// Command-line-level knobs applied on top of a parsed RunConfig.
struct RunnerOverrides {
  std::optional<uint64_t> seed;  // replaces the config's seed / seed base
  std::optional<double> gate;    // blanket squared-Mahalanobis threshold, all modalities
  std::optional<double> tau;     // replaces filter.tau
  bool skip_stale = false;       // tolerate late measurements instead of aborting
  bool force = false;            // allow overwriting existing output files
};

// Each driver reads nothing but its arguments, writes its output files next
// to `out` (siblings derive from its stem), and returns a JSON summary that
// is also written to <stem>_summary.json. All failures surface as Error.

// Synthesizes one scenario realization: measurement stream CSV at `out`,
// plus <stem>_truth.csv and <stem>_outliers.csv.
std::string run_simulate(const RunConfig& config, const RunnerOverrides& overrides,
                         const std::string& out);

// Runs the filter over a stream file: interpolated estimates CSV at `out`
// (positions/velocities/accelerations on a uniform grid at the config's
// evaluation rate), plus <stem>_polygon.csv and <stem>_steps.csv.
std::string run_track(const RunConfig& config, const RunnerOverrides& overrides,
                      const std::string& stream_path, const std::string& out);

// Monte Carlo aggregation. Position-fix scenarios produce per-timestep
// consistency curves (<out> = steps CSV with RMSE/ANEES/bound columns);
// range scenarios produce a per-run table with the baseline comparison.
std::string run_mc(const RunConfig& config, const RunnerOverrides& overrides,
                   const std::string& out);

// Per-run metric table (one row per seed) for any scenario kind.
std::string run_evaluate(const RunConfig& config, const RunnerOverrides& overrides,
                         const std::string& out);

// Process-noise-ratio x knot-interval grid; writes the 9-cell table (or
// whatever the config's grids specify) and reports the best cell.
std::string run_sweep(const RunConfig& config, const RunnerOverrides& overrides,
                      const std::string& out);

}  // namespace sere
