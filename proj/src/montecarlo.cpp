#include "montecarlo.hpp"

#include <cmath>

#include "baseline.hpp"

namespace sere {

ModalityBank scenario_bank(const ScenarioConfig& scenario) {
  ModalityBank bank;
  bank.anchors = scenario.anchors;
  for (const auto& sensor : scenario.sensors) {
    bank.noise.emplace(sensor.modality, sensor.noise);
  }
  return bank;
}

namespace {

Eigen::VectorXd initial_position_for(const ScenarioConfig& scenario,
                                     const std::vector<TruthSample>& truth, double t_first,
                                     uint64_t seed) {
  Eigen::VectorXd p0;
  if (scenario.initial_position) {
    p0 = *scenario.initial_position;
  } else {
    p0 = interpolate_truth(truth, t_first).pos;
  }
  if (scenario.init_perturbation_std > 0.0) {
    Rng rng(derive_seed(seed, "init"));
    p0 += scenario.init_perturbation_std * rng.gauss_vector(static_cast<int>(p0.size()));
  }
  return p0;
}

bool stream_needs_explicit_init(const std::vector<MeasurementRecord>& records) {
  for (const auto& rec : records) {
    if (rec.modality == Modality::LinearPosition) return false;
  }
  return true;
}

}  // namespace

CaseStudyCurves monte_carlo_case_study(const ScenarioConfig& scenario, const FilterConfig& filter,
                                       int runs, uint64_t seed_base) {
  if (runs < 1) raise(Errc::InvalidArgument, "need at least one run");
  CaseStudyCurves curves;
  curves.dim = scenario.dim();

  // errors[run][step], covs[run][step]
  std::vector<std::vector<Eigen::VectorXd>> errors;
  std::vector<std::vector<Eigen::MatrixXd>> covs;
  std::vector<double> times;

  for (int i = 0; i < runs; ++i) {
    const uint64_t seed = seed_base + static_cast<uint64_t>(i);
    try {
      const auto truth = make_truth(scenario, seed);
      const auto records = sample_measurements(truth, scenario, seed);
      const ModalityBank bank = scenario_bank(scenario);

      FilterConfig fc = filter;
      fc.dim = scenario.dim();
      if (!records.empty() && stream_needs_explicit_init(records)) {
        fc.initial_position = initial_position_for(scenario, truth, records.front().t, seed);
      } else if (scenario.initial_position) {
        fc.initial_position = initial_position_for(scenario, truth,
                                                   records.empty() ? 0.0 : records.front().t, seed);
      }

      Filter f(fc);
      RunOptions opts;
      opts.record_step_posteriors = true;
      const RunResult res = f.run(records, bank, opts);

      std::vector<Eigen::VectorXd> run_err;
      std::vector<Eigen::MatrixXd> run_cov;
      std::vector<double> run_t;
      run_err.reserve(res.step_posteriors.size());
      for (const auto& sp : res.step_posteriors) {
        const TruthSample ts = interpolate_truth(truth, sp.t);
        run_err.push_back(sp.mean - ts.pos);
        run_cov.push_back(sp.cov);
        run_t.push_back(sp.t);
      }
      if (!times.empty() && run_t.size() != times.size()) {
        raise(Errc::LengthMismatch, "runs produced differing step counts");
      }
      if (times.empty()) times = run_t;
      errors.push_back(std::move(run_err));
      covs.push_back(std::move(run_cov));
    } catch (const Error&) {
      ++curves.runs_failed;
    }
  }

  curves.runs_used = static_cast<int>(errors.size());
  if (curves.runs_used == 0) raise(Errc::InsufficientInitData, "all Monte Carlo runs failed");

  const int steps = static_cast<int>(times.size());
  const int d = curves.dim;
  const int m = curves.runs_used;
  curves.t = times;
  curves.anees_t.resize(steps);
  curves.rmse_t.resize(steps);
  curves.mean_err = Eigen::MatrixXd::Zero(steps, d);
  curves.std_err = Eigen::MatrixXd::Zero(steps, d);

  std::vector<Eigen::VectorXd> step_err(static_cast<size_t>(m));
  std::vector<Eigen::MatrixXd> step_cov(static_cast<size_t>(m));
  double anees_sum = 0.0;
  for (int k = 0; k < steps; ++k) {
    for (int i = 0; i < m; ++i) {
      step_err[static_cast<size_t>(i)] = errors[static_cast<size_t>(i)][static_cast<size_t>(k)];
      step_cov[static_cast<size_t>(i)] = covs[static_cast<size_t>(i)][static_cast<size_t>(k)];
    }
    const AneesReport rep = anees(step_err, step_cov);
    curves.anees_t[static_cast<size_t>(k)] = rep.anees;
    curves.band_lo = rep.lower;
    curves.band_hi = rep.upper;
    anees_sum += rep.anees;

    double sq = 0.0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < m; ++i) {
      sq += step_err[static_cast<size_t>(i)].squaredNorm();
      mean += step_err[static_cast<size_t>(i)];
    }
    mean /= m;
    curves.rmse_t[static_cast<size_t>(k)] = std::sqrt(sq / m);
    curves.mean_err.row(k) = mean.transpose();
    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < m; ++i) {
      var += (step_err[static_cast<size_t>(i)] - mean).cwiseAbs2();
    }
    if (m > 1) var /= (m - 1);
    curves.std_err.row(k) = var.cwiseSqrt().transpose();
  }
  curves.anees_mean = anees_sum / steps;
  return curves;
}

ScenarioRunResult run_scenario_once(const ScenarioConfig& scenario, const FilterConfig& filter,
                                    uint64_t seed, const EvalGrid& grid,
                                    const ScenarioRunOptions& options) {
  ScenarioRunResult out;
  out.seed = seed;
  try {
    const auto truth = make_truth(scenario, seed);
    const auto records = sample_measurements(truth, scenario, seed);
    if (records.empty()) raise(Errc::InsufficientInitData, "scenario produced no measurements");
    const ModalityBank bank = scenario_bank(scenario);

    FilterConfig fc = filter;
    fc.dim = scenario.dim();
    Eigen::VectorXd p0;
    const bool explicit_init = stream_needs_explicit_init(records) || scenario.initial_position ||
                               scenario.init_perturbation_std > 0.0;
    if (explicit_init) {
      p0 = initial_position_for(scenario, truth, records.front().t, seed);
      fc.initial_position = p0;
    }

    Filter f(fc);
    const RunResult res = f.run(records, bank);
    out.rejected_total = res.rejected;
    out.control_points = f.total_control_points();

    // Map step reports back onto records to count rejected outliers.
    const size_t start = records.size() - res.reports.size();
    for (size_t i = 0; i < res.reports.size(); ++i) {
      const bool is_outlier = records[start + i].outlier;
      if (is_outlier) {
        ++out.outliers_total;
        if (!res.reports[i].accepted && !res.reports[i].stale) ++out.outliers_rejected;
      }
    }

    // Shared evaluation instants: inside the scenario horizon and the
    // polygon's covered span.
    const ControlPolygon poly = f.control_polygon();
    std::vector<double> eval_t;
    const long n_eval = static_cast<long>(std::floor((grid.stop - grid.start) * grid.rate + 1e-9));
    for (long k = 0; k <= n_eval; ++k) {
      const double t = grid.start + static_cast<double>(k) / grid.rate;
      if (t <= poly.t_begin() || t > poly.t_end()) continue;
      if (t < truth.front().t || t > truth.back().t) continue;
      eval_t.push_back(t);
    }
    if (eval_t.empty()) raise(Errc::LengthMismatch, "evaluation grid has no usable instants");

    std::vector<Eigen::VectorXd> est;
    std::vector<Eigen::VectorXd> tru;
    est.reserve(eval_t.size());
    tru.reserve(eval_t.size());
    for (const double t : eval_t) {
      est.push_back(poly.evaluate(t, 0));
      tru.push_back(interpolate_truth(truth, t).pos);
    }
    out.rmse = rmse(est, tru).overall;

    if (options.with_ungated) {
      FilterConfig ungated = fc;
      ungated.gate.clear();
      Filter g(ungated);
      g.run(records, bank);
      const ControlPolygon upoly = g.control_polygon();
      std::vector<Eigen::VectorXd> uest;
      uest.reserve(eval_t.size());
      for (const double t : eval_t) uest.push_back(upoly.evaluate(t, 0));
      out.ungated_rmse = rmse(uest, tru).overall;
    }

    if (options.with_baseline) {
      BaselineConfig bc;
      bc.dim = scenario.dim();
      bc.sigma0_pos = fc.sigma0;
      if (auto it = bank.noise.find(Modality::Accelerometer); it != bank.noise.end()) {
        bc.accel_var = it->second(0, 0);
      }
      BaselineEkf ekf(bc);
      const Eigen::VectorXd b0 =
          explicit_init ? p0 : interpolate_truth(truth, records.front().t).pos;
      ekf.initialize(records.front().t, b0);
      ekf.run(records, bank);
      out.baseline_states = ekf.stored_states();
      std::vector<Eigen::VectorXd> best;
      std::vector<Eigen::VectorXd> btru;
      for (const double t : eval_t) {
        if (t < ekf.history().front().t || t > ekf.history().back().t) continue;
        best.push_back(ekf.position_at(t));
        btru.push_back(interpolate_truth(truth, t).pos);
      }
      out.baseline_rmse = rmse(best, btru).overall;
    }
  } catch (const Error& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

std::vector<ScenarioRunResult> monte_carlo_scenario(const ScenarioConfig& scenario,
                                                    const FilterConfig& filter, int runs,
                                                    uint64_t seed_base, const EvalGrid& grid,
                                                    const ScenarioRunOptions& options) {
  std::vector<ScenarioRunResult> out;
  out.reserve(static_cast<size_t>(runs));
  for (int i = 0; i < runs; ++i) {
    out.push_back(run_scenario_once(scenario, filter, seed_base + static_cast<uint64_t>(i), grid,
                                    options));
  }
  return out;
}

std::vector<SweepCell> parameter_sweep(const ScenarioConfig& scenario, const FilterConfig& base,
                                       const std::vector<double>& ratios,
                                       const std::vector<double>& taus, double nu,
                                       int runs_per_cell, uint64_t seed_base,
                                       const EvalGrid& grid) {
  std::vector<SweepCell> cells;
  for (const double ratio : ratios) {
    for (const double tau : taus) {
      FilterConfig fc = base;
      fc.tau = tau;
      fc.process_noise.override_matrix.reset();
      fc.process_noise.omega = ratio * nu;
      fc.process_noise.nu = nu;
      SweepCell cell;
      cell.ratio = ratio;
      cell.tau = tau;
      double sum = 0.0;
      for (int i = 0; i < runs_per_cell; ++i) {
        const ScenarioRunResult r =
            run_scenario_once(scenario, fc, seed_base + static_cast<uint64_t>(i), grid);
        if (r.failed) {
          ++cell.runs_failed;
        } else {
          sum += r.rmse;
          ++cell.runs_used;
        }
      }
      cell.mean_rmse = cell.runs_used > 0 ? sum / cell.runs_used : std::nan("");
      cells.push_back(cell);
    }
  }
  return cells;
}

}  // namespace sere
