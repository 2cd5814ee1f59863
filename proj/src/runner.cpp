#include "runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "baseline.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "montecarlo.hpp"

namespace sere {

namespace {

using nlohmann::json;

std::string sibling(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  std::filesystem::path s = p.parent_path() / p.stem();
  return s.string() + suffix;
}

FilterConfig filter_with_overrides(const RunConfig& config, const RunnerOverrides& overrides) {
  FilterConfig fc = config.filter;
  fc.dim = config.scenario.dim();
  if (overrides.tau) fc.tau = *overrides.tau;
  if (overrides.gate) {
    for (Modality m : {Modality::LinearPosition, Modality::Toa, Modality::Tdoa,
                       Modality::Accelerometer}) {
      fc.gate[m] = *overrides.gate;
    }
  }
  return fc;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string finish(const json& summary, const std::string& out, bool force) {
  const std::string text = summary.dump(2) + "\n";
  write_text_file(sibling(out, "_summary.json"), text, force);
  return text;
}

// Shared per-run table + summary for evaluate and the range-scenario side of
// mc. Column order is fixed.
json scenario_table(const RunConfig& config, const FilterConfig& fc, uint64_t seed_base,
                    const std::string& out, bool force) {
  ScenarioRunOptions options;
  options.with_baseline = true;
  options.with_ungated = !fc.gate.empty();
  const auto results =
      monte_carlo_scenario(config.scenario, fc, config.mc_runs, seed_base, config.eval, options);

  std::string table = "seed,failed,rmse,baseline_rmse,ungated_rmse,outliers_total,"
                      "outliers_rejected,rejected_total,control_points,baseline_states\n";
  std::vector<double> rmses, baseline_rmses, ungated_rmses;
  long outliers_total = 0;
  long outliers_rejected = 0;
  int failed = 0;
  int wins_vs_baseline = 0;
  int wins_vs_ungated = 0;
  for (const auto& r : results) {
    table += std::to_string(r.seed) + ',' + (r.failed ? "1" : "0") + ',';
    if (r.failed) {
      table += ",,,,,,,\n";
      ++failed;
      continue;
    }
    table += format_double(r.rmse) + ',' + format_double(r.baseline_rmse) + ',' +
             format_double(r.ungated_rmse) + ',' + std::to_string(r.outliers_total) + ',' +
             std::to_string(r.outliers_rejected) + ',' + std::to_string(r.rejected_total) + ',' +
             std::to_string(r.control_points) + ',' + std::to_string(r.baseline_states) + '\n';
    rmses.push_back(r.rmse);
    baseline_rmses.push_back(r.baseline_rmse);
    if (options.with_ungated) ungated_rmses.push_back(r.ungated_rmse);
    outliers_total += r.outliers_total;
    outliers_rejected += r.outliers_rejected;
    if (r.rmse < r.baseline_rmse) ++wins_vs_baseline;
    if (options.with_ungated && r.rmse < r.ungated_rmse) ++wins_vs_ungated;
  }
  write_text_file(out, table, force);

  json summary;
  summary["runs"] = config.mc_runs;
  summary["runs_failed"] = failed;
  summary["seed_base"] = seed_base;
  summary["median_rmse"] = median(rmses);
  summary["median_baseline_rmse"] = median(baseline_rmses);
  summary["wins_vs_baseline"] = wins_vs_baseline;
  if (options.with_ungated) {
    summary["median_ungated_rmse"] = median(ungated_rmses);
    summary["wins_vs_ungated"] = wins_vs_ungated;
  }
  summary["outliers_total"] = outliers_total;
  summary["outliers_rejected"] = outliers_rejected;
  summary["files"] = {{"runs", out}};
  return summary;
}

}  // namespace

std::string run_simulate(const RunConfig& config, const RunnerOverrides& overrides,
                         const std::string& out) {
  const uint64_t seed = overrides.seed.value_or(config.seed_base);
  const auto truth = make_truth(config.scenario, seed);
  const auto records = sample_measurements(truth, config.scenario, seed);

  const std::string truth_path = sibling(out, "_truth.csv");
  const std::string outlier_path = sibling(out, "_outliers.csv");
  write_stream_csv(out, records, config.scenario.dim(), overrides.force);
  write_truth_csv(truth_path, truth, overrides.force);
  write_outlier_csv(outlier_path, records, overrides.force);

  std::map<std::string, long> per_modality;
  long outliers = 0;
  for (const auto& rec : records) {
    ++per_modality[modality_token(rec.modality)];
    if (rec.outlier) ++outliers;
  }
  json summary;
  summary["command"] = "simulate";
  summary["config"] = config.name;
  summary["seed"] = seed;
  summary["records"] = records.size();
  summary["truth_samples"] = truth.size();
  summary["outliers"] = outliers;
  summary["per_modality"] = per_modality;
  summary["files"] = {{"stream", out}, {"truth", truth_path}, {"outliers", outlier_path}};
  return finish(summary, out, overrides.force);
}

std::string run_track(const RunConfig& config, const RunnerOverrides& overrides,
                      const std::string& stream_path, const std::string& out) {
  const StreamFile stream = read_stream_csv(stream_path);
  const ModalityBank bank = scenario_bank(config.scenario);

  FilterConfig fc = filter_with_overrides(config, overrides);
  if (config.scenario.initial_position) fc.initial_position = config.scenario.initial_position;

  Filter filter(fc);
  RunOptions options;
  options.skip_stale = overrides.skip_stale;
  const RunResult result = filter.run(stream.records, bank, options);

  const ControlPolygon polygon = filter.control_polygon();
  std::vector<EstimateRow> rows;
  const double rate = config.eval.rate;
  const double t0 = polygon.t_begin();
  const long n = static_cast<long>(std::floor((polygon.t_end() - t0) * rate + 1e-9));
  for (long k = 1; k <= n; ++k) {
    EstimateRow row;
    // The last grid point can overshoot the covered span by an ulp.
    row.t = std::min(t0 + static_cast<double>(k) / rate, polygon.t_end());
    row.pos = polygon.evaluate(row.t, 0);
    row.vel = polygon.evaluate(row.t, 1);
    row.acc = polygon.evaluate(row.t, 2);
    rows.push_back(std::move(row));
  }

  const std::string polygon_path = sibling(out, "_polygon.csv");
  const std::string steps_path = sibling(out, "_steps.csv");
  write_estimates_csv(out, rows, overrides.force);
  write_polygon_csv(polygon_path, polygon, overrides.force);
  write_step_log_csv(steps_path, result.reports, overrides.force);

  json summary;
  summary["command"] = "track";
  summary["config"] = config.name;
  summary["stream"] = stream_path;
  summary["records"] = stream.records.size();
  summary["updates"] = result.updates;
  summary["rejected"] = result.rejected;
  summary["stale_skipped"] = result.stale_skipped;
  summary["control_points"] = filter.total_control_points();
  summary["estimates"] = rows.size();
  summary["query_rate"] = rate;
  summary["files"] = {{"estimates", out}, {"polygon", polygon_path}, {"steps", steps_path}};
  return finish(summary, out, overrides.force);
}

std::string run_mc(const RunConfig& config, const RunnerOverrides& overrides,
                   const std::string& out) {
  const uint64_t seed_base = overrides.seed.value_or(config.seed_base);
  const FilterConfig fc = filter_with_overrides(config, overrides);

  if (config.scenario.kind != ScenarioConfig::Kind::LissajousCv) {
    json summary = scenario_table(config, fc, seed_base, out, overrides.force);
    summary["command"] = "mc";
    summary["config"] = config.name;
    return finish(summary, out, overrides.force);
  }

  const CaseStudyCurves curves =
      monte_carlo_case_study(config.scenario, fc, config.mc_runs, seed_base);

  // Exact-filter lower bound for the position-fix scenario: available when a
  // single position sensor drives the run.
  std::vector<double> bound_rmse;
  const SensorSpec* gps = nullptr;
  for (const auto& s : config.scenario.sensors) {
    if (s.modality == Modality::LinearPosition) gps = &s;
  }
  if (gps != nullptr && config.scenario.sensors.size() == 1) {
    const LinearSystem system = case_study_cv_system(1.0 / config.scenario.truth_rate,
                                                     config.scenario.accel_noise_var,
                                                     gps->noise(0, 0));
    const auto bound =
        crlb_linear(system, static_cast<int>(curves.t.size()) + 1, config.scenario.dim());
    // Step j of the curves follows the (j+2)-th fix: the first fix seeds the
    // filter, so it aligns with bound entry j+1.
    bound_rmse.resize(curves.t.size());
    for (size_t j = 0; j < curves.t.size(); ++j) bound_rmse[j] = std::sqrt(bound[j + 1]);
  }

  std::string table = "t,rmse,anees,band_lo,band_hi";
  if (!bound_rmse.empty()) table += ",crlb_rmse";
  for (int a = 1; a <= curves.dim; ++a) table += ",mean_e" + std::to_string(a);
  for (int a = 1; a <= curves.dim; ++a) table += ",std_e" + std::to_string(a);
  table += '\n';
  int steps_in_band = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  double rmse_sq_sum = 0.0;
  for (size_t k = 0; k < curves.t.size(); ++k) {
    table += format_double(curves.t[k]) + ',' + format_double(curves.rmse_t[k]) + ',' +
             format_double(curves.anees_t[k]) + ',' + format_double(curves.band_lo) + ',' +
             format_double(curves.band_hi);
    if (!bound_rmse.empty()) {
      table += ',' + format_double(bound_rmse[k]);
      if (bound_rmse[k] > 0) min_ratio = std::min(min_ratio, curves.rmse_t[k] / bound_rmse[k]);
    }
    for (int a = 0; a < curves.dim; ++a) {
      table += ',' + format_double(curves.mean_err(static_cast<Eigen::Index>(k), a));
    }
    for (int a = 0; a < curves.dim; ++a) {
      table += ',' + format_double(curves.std_err(static_cast<Eigen::Index>(k), a));
    }
    table += '\n';
    if (curves.anees_t[k] >= curves.band_lo && curves.anees_t[k] <= curves.band_hi) {
      ++steps_in_band;
    }
    rmse_sq_sum += curves.rmse_t[k] * curves.rmse_t[k];
  }
  write_text_file(out, table, overrides.force);

  json summary;
  summary["command"] = "mc";
  summary["config"] = config.name;
  summary["runs"] = config.mc_runs;
  summary["runs_used"] = curves.runs_used;
  summary["runs_failed"] = curves.runs_failed;
  summary["seed_base"] = seed_base;
  summary["anees_mean"] = curves.anees_mean;
  summary["anees_band"] = {curves.band_lo, curves.band_hi};
  summary["anees_steps_in_band_fraction"] =
      curves.t.empty() ? 0.0 : static_cast<double>(steps_in_band) / curves.t.size();
  summary["rmse_overall"] = curves.t.empty() ? 0.0 : std::sqrt(rmse_sq_sum / curves.t.size());
  if (!bound_rmse.empty()) summary["min_rmse_to_bound_ratio"] = min_ratio;
  summary["files"] = {{"steps", out}};
  return finish(summary, out, overrides.force);
}

std::string run_evaluate(const RunConfig& config, const RunnerOverrides& overrides,
                         const std::string& out) {
  const uint64_t seed_base = overrides.seed.value_or(config.seed_base);
  const FilterConfig fc = filter_with_overrides(config, overrides);
  json summary = scenario_table(config, fc, seed_base, out, overrides.force);
  summary["command"] = "evaluate";
  summary["config"] = config.name;
  return finish(summary, out, overrides.force);
}

std::string run_sweep(const RunConfig& config, const RunnerOverrides& overrides,
                      const std::string& out) {
  const uint64_t seed_base = overrides.seed.value_or(config.seed_base);
  const FilterConfig fc = filter_with_overrides(config, overrides);
  const auto cells =
      parameter_sweep(config.scenario, fc, config.sweep_ratios, config.sweep_taus,
                      fc.process_noise.nu, config.sweep_runs_per_cell, seed_base, config.eval);

  std::string table = "ratio,tau,mean_rmse,runs_used,runs_failed\n";
  const SweepCell* best = nullptr;
  for (const auto& c : cells) {
    table += format_double(c.ratio) + ',' + format_double(c.tau) + ',';
    table += c.runs_used > 0 ? format_double(c.mean_rmse) : std::string();
    table += ',' + std::to_string(c.runs_used) + ',' + std::to_string(c.runs_failed) + '\n';
    if (c.runs_used > 0 && (best == nullptr || c.mean_rmse < best->mean_rmse)) best = &c;
  }
  write_text_file(out, table, overrides.force);

  json summary;
  summary["command"] = "sweep";
  summary["config"] = config.name;
  summary["seed_base"] = seed_base;
  summary["runs_per_cell"] = config.sweep_runs_per_cell;
  summary["cells"] = cells.size();
  if (best != nullptr) {
    summary["best"] = {{"ratio", best->ratio}, {"tau", best->tau},
                       {"mean_rmse", best->mean_rmse}};
  }
  summary["files"] = {{"cells", out}};
  return finish(summary, out, overrides.force);
}

}  // namespace sere
