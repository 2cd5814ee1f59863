#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "filter.hpp"
#include "metrics.hpp"
#include "scenario.hpp"

namespace sere {

// Anchor table and per-modality noise assembled from the scenario's sensor
// list, for feeding streams back through the filter.
ModalityBank scenario_bank(const ScenarioConfig& scenario);

// Per-timestep statistics across Monte Carlo runs of a position-measurement
// scenario, evaluated at the measurement instants.
struct CaseStudyCurves {
  std::vector<double> t;
  std::vector<double> anees_t;    // per-step ANEES across runs
  std::vector<double> rmse_t;     // per-step RMSE across runs
  Eigen::MatrixXd mean_err;       // steps x d, mean error per axis
  Eigen::MatrixXd std_err;        // steps x d, sample std per axis
  double anees_mean = 0.0;        // time average of anees_t
  double band_lo = 0.0;           // 95% chi-square band at d*runs dof
  double band_hi = 0.0;
  int runs_used = 0;
  int runs_failed = 0;
  int dim = 0;
};

CaseStudyCurves monte_carlo_case_study(const ScenarioConfig& scenario, const FilterConfig& filter,
                                       int runs, uint64_t seed_base);

struct EvalGrid {
  double start = 0.0;
  double stop = 0.0;
  double rate = 100.0;
};

struct ScenarioRunOptions {
  bool with_baseline = false;
  bool with_ungated = false;  // additionally run with the gate disabled
};

// One simulate -> track -> evaluate pass over a scenario.
struct ScenarioRunResult {
  bool failed = false;
  std::string error;
  uint64_t seed = 0;
  double rmse = 0.0;
  double baseline_rmse = 0.0;
  double ungated_rmse = 0.0;
  int outliers_total = 0;
  int outliers_rejected = 0;
  int rejected_total = 0;
  int control_points = 0;
  size_t baseline_states = 0;
};

ScenarioRunResult run_scenario_once(const ScenarioConfig& scenario, const FilterConfig& filter,
                                    uint64_t seed, const EvalGrid& grid,
                                    const ScenarioRunOptions& options = {});

// Independent runs with seeds seed_base + i; failures recorded, not fatal.
std::vector<ScenarioRunResult> monte_carlo_scenario(const ScenarioConfig& scenario,
                                                    const FilterConfig& filter, int runs,
                                                    uint64_t seed_base, const EvalGrid& grid,
                                                    const ScenarioRunOptions& options = {});

struct SweepCell {
  double ratio = 0.0;  // omega / nu
  double tau = 0.0;
  double mean_rmse = 0.0;
  int runs_used = 0;
  int runs_failed = 0;
};

// Process-noise-ratio x knot-interval grid; each cell averages the overall
// RMSE of `runs_per_cell` seeded runs.
std::vector<SweepCell> parameter_sweep(const ScenarioConfig& scenario, const FilterConfig& base,
                                       const std::vector<double>& ratios,
                                       const std::vector<double>& taus, double nu,
                                       int runs_per_cell, uint64_t seed_base,
                                       const EvalGrid& grid);

}  // namespace sere
