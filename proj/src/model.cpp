#include "model.hpp"

namespace sere {

namespace {

constexpr double kGeometryTol = 1e-12;

void check_noise_cov(const Eigen::MatrixXd& r) {
  if (r.rows() != r.cols()) raise(Errc::DimensionMismatch, "noise covariance must be square");
  if (!r.isApprox(r.transpose(), 1e-10)) {
    raise(Errc::NegativeVariance, "noise covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    raise(Errc::NegativeVariance, "noise covariance must be positive semidefinite");
  }
}

}  // namespace

const char* modality_token(Modality m) {
  switch (m) {
    case Modality::LinearPosition: return "gps";
    case Modality::Toa: return "toa";
    case Modality::Tdoa: return "tdoa";
    case Modality::Accelerometer: return "acc";
  }
  return "?";
}

Modality parse_modality(const std::string& token) {
  if (token == "gps") return Modality::LinearPosition;
  if (token == "toa") return Modality::Toa;
  if (token == "tdoa") return Modality::Tdoa;
  if (token == "acc") return Modality::Accelerometer;
  raise(Errc::SchemaViolation, "unknown modality token '" + token + "'");
}

int SensorModel::output_dim(int d) const {
  switch (modality) {
    case Modality::Toa:
    case Modality::Tdoa:
      return 1;
    default:
      return d;
  }
}

Eigen::VectorXd SensorModel::predict(const Eigen::VectorXd& interpolated) const {
  switch (modality) {
    case Modality::LinearPosition:
    case Modality::Accelerometer:
      return interpolated;
    case Modality::Toa: {
      const double n = (interpolated - anchor_a).norm();
      if (n == 0.0) raise(Errc::AnchorCoincidesWithPosition, "position equals the ToA anchor");
      return Eigen::VectorXd::Constant(1, n);
    }
    case Modality::Tdoa: {
      const double ni = (interpolated - anchor_a).norm();
      const double nj = (interpolated - anchor_b).norm();
      if (ni == 0.0 || nj == 0.0) {
        raise(Errc::AnchorCoincidesWithPosition, "position equals a TDoA anchor");
      }
      return Eigen::VectorXd::Constant(1, ni - nj);
    }
  }
  raise(Errc::InvalidArgument, "unhandled modality");
}

Eigen::MatrixXd SensorModel::jacobian(const Eigen::VectorXd& interpolated) const {
  const auto d = interpolated.size();
  switch (modality) {
    case Modality::LinearPosition:
    case Modality::Accelerometer:
      return Eigen::MatrixXd::Identity(d, d);
    case Modality::Toa: {
      const Eigen::VectorXd diff = interpolated - anchor_a;
      const double n = diff.norm();
      if (n < kGeometryTol) raise(Errc::SingularGeometry, "ToA gradient undefined at the anchor");
      return (diff / n).transpose();
    }
    case Modality::Tdoa: {
      const Eigen::VectorXd di = interpolated - anchor_a;
      const Eigen::VectorXd dj = interpolated - anchor_b;
      const double ni = di.norm();
      const double nj = dj.norm();
      if (ni < kGeometryTol || nj < kGeometryTol) {
        raise(Errc::SingularGeometry, "TDoA gradient undefined at an anchor");
      }
      return (di / ni - dj / nj).transpose();
    }
  }
  raise(Errc::InvalidArgument, "unhandled modality");
}

SensorModel SensorModel::linear_position(const Eigen::MatrixXd& r) {
  check_noise_cov(r);
  SensorModel m;
  m.modality = Modality::LinearPosition;
  m.kinematic_order = 0;
  m.noise_cov = r;
  return m;
}

SensorModel SensorModel::accelerometer(const Eigen::MatrixXd& r) {
  check_noise_cov(r);
  SensorModel m;
  m.modality = Modality::Accelerometer;
  m.kinematic_order = 2;
  m.noise_cov = r;
  return m;
}

SensorModel SensorModel::toa(double r_var, const Eigen::VectorXd& anchor) {
  if (r_var < 0.0) raise(Errc::NegativeVariance, "ToA noise variance must be >= 0");
  SensorModel m;
  m.modality = Modality::Toa;
  m.kinematic_order = 0;
  m.noise_cov = Eigen::MatrixXd::Constant(1, 1, r_var);
  m.anchor_a = anchor;
  return m;
}

SensorModel SensorModel::tdoa(double r_var, const Eigen::VectorXd& anchor_i,
                              const Eigen::VectorXd& anchor_j) {
  if (r_var < 0.0) raise(Errc::NegativeVariance, "TDoA noise variance must be >= 0");
  SensorModel m;
  m.modality = Modality::Tdoa;
  m.kinematic_order = 0;
  m.noise_cov = Eigen::MatrixXd::Constant(1, 1, r_var);
  m.anchor_a = anchor_i;
  m.anchor_b = anchor_j;
  return m;
}

Eigen::MatrixXd build_transition(int d) {
  if (d < 1) raise(Errc::InvalidArgument, "dimension must be >= 1");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4 * d, 4 * d);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  a.block(0, d, d, d) = id;
  a.block(d, 2 * d, d, d) = id;
  a.block(2 * d, 3 * d, d, d) = id;
  a.block(3 * d, 0, d, d) = -id;
  a.block(3 * d, 2 * d, d, d) = 2.0 * id;
  return a;
}

Eigen::VectorXd apply_transition(const Eigen::VectorXd& x, int d) {
  if (x.size() != 4 * d) raise(Errc::DimensionMismatch, "state must stack 4 control points");
  Eigen::VectorXd y(4 * d);
  y.segment(0, 3 * d) = x.segment(d, 3 * d);
  y.segment(3 * d, d) = 2.0 * x.segment(2 * d, d) - x.segment(0, d);
  return y;
}

Eigen::MatrixXd build_process_noise(const ProcessNoiseSpec& spec, int d) {
  if (spec.override_matrix) {
    const Eigen::MatrixXd& q = *spec.override_matrix;
    if (q.rows() != 4 * d || q.cols() != 4 * d) {
      raise(Errc::DimensionMismatch, "process noise override must be 4d x 4d");
    }
    check_noise_cov(q);
    return q;
  }
  if (spec.omega < 0.0 || spec.nu < 0.0) {
    raise(Errc::NegativeVariance, "process noise variances must be >= 0");
  }
  Eigen::VectorXd diag(4 * d);
  diag.head(3 * d).setConstant(spec.omega);
  diag.tail(d).setConstant(spec.nu);
  return diag.asDiagonal();
}

Eigen::VectorXd predict_measurement(const SensorModel& model, const RcpState& state, double t_z) {
  const NormalizedTime nt = normalized_time(state.grid, t_z, state.terminal_segment());
  const Eigen::MatrixXd lambda = coefficient_matrix(nt, model.kinematic_order, state.dim);
  return model.predict(lambda * state.mean);
}

}  // namespace sere
