#include "filter.hpp"

#include <cmath>
#include <string>

namespace sere {

namespace {

constexpr double kSpdTol = 1e-12;

// Solves S * X = B for symmetric positive-definite S; SingularInnovation on
// factorization failure or conditioning below tolerance.
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& s, const Eigen::MatrixXd& b) {
  if (s.diagonal().minCoeff() < kSpdTol) {
    raise(Errc::SingularInnovation, "innovation covariance not positive definite");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    raise(Errc::SingularInnovation, "innovation covariance factorization failed");
  }
  return llt.solve(b);
}

}  // namespace

SensorModel ModalityBank::model_for(const MeasurementRecord& rec) const {
  auto it = noise.find(rec.modality);
  if (it == noise.end()) {
    raise(Errc::SchemaViolation,
          std::string("no noise model configured for modality '") + modality_token(rec.modality) + "'");
  }
  auto anchor = [&](int id) -> const Eigen::VectorXd& {
    if (id < 0 || id >= static_cast<int>(anchors.size())) {
      raise(Errc::SchemaViolation, "anchor id " + std::to_string(id) + " not in the anchor table");
    }
    return anchors[static_cast<size_t>(id)];
  };
  switch (rec.modality) {
    case Modality::LinearPosition:
      return SensorModel::linear_position(it->second);
    case Modality::Accelerometer:
      return SensorModel::accelerometer(it->second);
    case Modality::Toa:
      return SensorModel::toa(it->second(0, 0), anchor(rec.anchor_i));
    case Modality::Tdoa:
      return SensorModel::tdoa(it->second(0, 0), anchor(rec.anchor_i), anchor(rec.anchor_j));
  }
  raise(Errc::InvalidArgument, "unhandled modality");
}

bool gate_accepts(const Eigen::VectorXd& innovation, const Eigen::MatrixXd& innovation_cov,
                  double threshold_sq) {
  const Eigen::VectorXd solved = spd_solve(innovation_cov, innovation);
  const double m2 = innovation.dot(solved);
  return m2 < threshold_sq;
}

RcpState make_initial_state(const FilterConfig& config, double t_first,
                            const Eigen::VectorXd& position) {
  if (position.size() != config.dim) {
    raise(Errc::DimensionMismatch, "initial position dimension mismatch");
  }
  RcpState st;
  st.dim = config.dim;
  st.grid = KnotGrid(t_first - 3.0 * config.tau, config.tau, 4);
  st.mean.resize(4 * config.dim);
  for (int j = 0; j < 4; ++j) st.mean.segment(j * config.dim, config.dim) = position;
  st.cov = config.sigma0 * config.sigma0 *
           Eigen::MatrixXd::Identity(4 * config.dim, 4 * config.dim);
  return st;
}

Filter::Filter(FilterConfig config) : config_(std::move(config)) {
  if (config_.dim < 1) raise(Errc::InvalidArgument, "dimension must be >= 1");
  if (config_.tau <= 0.0) raise(Errc::InvalidArgument, "knot interval must be positive");
  for (const auto& [modality, eps2] : config_.gate) {
    if (!(eps2 > 0.0)) raise(Errc::InvalidArgument, "gate threshold must be positive");
  }
  transition_ = build_transition(config_.dim);
  process_noise_ = build_process_noise(config_.process_noise, config_.dim);
}

void Filter::initialize(double t_first, const Eigen::VectorXd& position) {
  state_ = make_initial_state(config_, t_first, position);
  archived_.clear();
  initialized_ = true;
}

int Filter::propagate_to(double t) {
  int advances = 0;
  while (t > state_.newest_knot_time()) {
    // The oldest control point leaves the window; its estimate is final.
    archived_.push_back(state_.control_point(0));
    state_.mean = apply_transition(state_.mean, config_.dim);
    state_.cov = transition_ * state_.cov * transition_.transpose() + process_noise_;
    ++state_.grid.n_knots;
    ++advances;
  }
  return advances;
}

FilterStepReport Filter::step(const MeasurementRecord& z, const SensorModel& model) {
  if (!initialized_) raise(Errc::InsufficientInitData, "filter not initialized");
  if (!std::isfinite(z.t) || !z.value.allFinite()) {
    raise(Errc::InvalidArgument, "non-finite measurement");
  }
  if (z.value.size() != model.output_dim(config_.dim)) {
    raise(Errc::DimensionMismatch, "measurement dimension does not match the modality");
  }
  if (z.t <= state_.penultimate_knot_time()) {
    raise(Errc::StaleMeasurement,
          "measurement at t=" + std::to_string(z.t) + " precedes the terminal segment");
  }

  FilterStepReport report;
  report.t = z.t;
  report.modality = z.modality;
  report.knot_advances = propagate_to(z.t);
  report.propagated = report.knot_advances > 0;

  const int d = config_.dim;
  const NormalizedTime nt = normalized_time(state_.grid, z.t, state_.terminal_segment());
  const Eigen::MatrixXd lambda = coefficient_matrix(nt, model.kinematic_order, d);
  const Eigen::VectorXd interpolated = lambda * state_.mean;
  const Eigen::MatrixXd h = model.jacobian(interpolated) * lambda;

  report.predicted = model.predict(interpolated);
  report.innovation = z.value - report.predicted;
  Eigen::MatrixXd s = h * state_.cov * h.transpose() + model.noise_cov;
  s = 0.5 * (s + s.transpose()).eval();
  report.innovation_cov = s;

  const Eigen::VectorXd solved = spd_solve(s, report.innovation);
  report.mahalanobis_sq = report.innovation.dot(solved);

  if (auto it = config_.gate.find(z.modality); it != config_.gate.end()) {
    if (!(report.mahalanobis_sq < it->second)) {
      // Rejected: the post-propagation prior is the posterior, bit for bit.
      report.accepted = false;
      return report;
    }
  }

  const Eigen::MatrixXd ph_t = state_.cov * h.transpose();
  const Eigen::MatrixXd gain = spd_solve(s, ph_t.transpose()).transpose();
  state_.mean += gain * report.innovation;
  state_.cov = (Eigen::MatrixXd::Identity(4 * d, 4 * d) - gain * h) * state_.cov;
  state_.cov = 0.5 * (state_.cov + state_.cov.transpose()).eval();
  report.accepted = true;
  return report;
}

Eigen::MatrixXd Filter::observation_matrix(const SensorModel& model, double t_z) const {
  if (!initialized_) raise(Errc::InsufficientInitData, "filter not initialized");
  const NormalizedTime nt = normalized_time(state_.grid, t_z, state_.terminal_segment());
  const Eigen::MatrixXd lambda = coefficient_matrix(nt, model.kinematic_order, config_.dim);
  return model.jacobian(lambda * state_.mean) * lambda;
}

MotionPosterior Filter::interpolate_posterior(const std::vector<KinematicQuery>& queries) const {
  if (!initialized_) raise(Errc::InsufficientInitData, "filter not initialized");
  MotionPosterior out;
  out.queries = queries;
  const Eigen::MatrixXd lambda =
      batch_coefficient_matrix(queries, state_.grid, state_.terminal_segment(), config_.dim);
  out.mean = lambda * state_.mean;
  out.cov = lambda * state_.cov * lambda.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

RunResult Filter::run(const std::vector<MeasurementRecord>& stream, const ModalityBank& bank,
                      const RunOptions& options) {
  RunResult result;
  size_t start = 0;

  if (!initialized_ && !stream.empty()) {
    if (config_.initial_position) {
      initialize(stream.front().t, *config_.initial_position);
    } else {
      // Consume the first linear-position record as the anchor.
      size_t i = 0;
      while (i < stream.size() && stream[i].modality != Modality::LinearPosition) ++i;
      if (i == stream.size()) {
        raise(Errc::InsufficientInitData,
              "stream has no position record and no initial position was configured");
      }
      initialize(stream[i].t, stream[i].value);
      start = i + 1;
    }
  }

  for (size_t k = start; k < stream.size(); ++k) {
    const MeasurementRecord& rec = stream[k];
    if (k > 0) {
      const MeasurementRecord& prev = stream[k - 1];
      if (rec.t < prev.t || (rec.t == prev.t && rec.seq < prev.seq)) {
        raise(Errc::UnsortedStream, "stream not sorted by (t, seq) at seq " + std::to_string(rec.seq));
      }
    }
    const SensorModel model = bank.model_for(rec);
    FilterStepReport report;
    try {
      report = step(rec, model);
    } catch (const Error& e) {
      if (e.code() == Errc::StaleMeasurement && options.skip_stale) {
        report.t = rec.t;
        report.modality = rec.modality;
        report.accepted = false;
        report.stale = true;
        ++result.stale_skipped;
        result.reports.push_back(std::move(report));
        continue;
      }
      throw;
    }
    if (report.accepted) {
      ++result.updates;
      if (options.record_step_posteriors) {
        const MotionPosterior post = interpolate_posterior({{rec.t, 0}});
        result.step_posteriors.push_back({rec.t, post.mean, post.cov});
      }
    } else {
      ++result.rejected;
    }
    result.reports.push_back(std::move(report));
  }
  return result;
}

ControlPolygon Filter::control_polygon() const {
  if (!initialized_) raise(Errc::InsufficientInitData, "filter not initialized");
  std::vector<Eigen::VectorXd> points = archived_;
  for (int j = 0; j < 4; ++j) points.push_back(state_.control_point(j));
  return ControlPolygon(state_.grid.t_origin, config_.tau, std::move(points));
}

}  // namespace sere
