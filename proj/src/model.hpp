#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "spline.hpp"

namespace sere {

// Sensor modalities. Stream/config token in parentheses: linear position
// ("gps"), time-of-arrival range ("toa"), range difference ("tdoa"),
// accelerometer ("acc").
enum class Modality { LinearPosition, Toa, Tdoa, Accelerometer };

const char* modality_token(Modality m);
Modality parse_modality(const std::string& token);  // SchemaViolation on unknown token

// A timestamped sensor reading. `outlier` is simulation ground truth carried
// in the outlier log, never by the measurement stream itself.
struct MeasurementRecord {
  double t = 0.0;
  Modality modality = Modality::LinearPosition;
  Eigen::VectorXd value;
  int anchor_i = -1;
  int anchor_j = -1;
  long seq = 0;
  bool outlier = false;
};

// Sensing function b, its Jacobian, noise covariance and the kinematic order
// of the spline quantity it observes.
struct SensorModel {
  Modality modality = Modality::LinearPosition;
  int kinematic_order = 0;
  Eigen::MatrixXd noise_cov;   // measurement-space R
  Eigen::VectorXd anchor_a;    // ToA anchor, or first TDoA anchor
  Eigen::VectorXd anchor_b;    // second TDoA anchor

  int output_dim(int d) const;

  // b(s) applied to an interpolated kinematic quantity s.
  Eigen::VectorXd predict(const Eigen::VectorXd& interpolated) const;

  // J_b evaluated at the interpolated point: identity for linear position and
  // accelerometer, unit row for ToA, difference of unit rows for TDoA.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& interpolated) const;

  static SensorModel linear_position(const Eigen::MatrixXd& r);
  static SensorModel accelerometer(const Eigen::MatrixXd& r);
  static SensorModel toa(double r_var, const Eigen::VectorXd& anchor);
  static SensorModel tdoa(double r_var, const Eigen::VectorXd& anchor_i,
                          const Eigen::VectorXd& anchor_j);
};

// Filter state: the four most recent control points stacked into one 4d
// vector (oldest block first), with covariance, on a growing knot grid. The
// grid's newest knot is index n_knots; the terminal segment is
// (t_{n_knots-1}, t_{n_knots}].
struct RcpState {
  Eigen::VectorXd mean;  // 4d
  Eigen::MatrixXd cov;   // 4d x 4d
  KnotGrid grid;
  int dim = 0;

  Eigen::VectorXd control_point(int j) const {  // j = 0 (oldest) .. 3 (newest)
    return mean.segment(j * dim, dim);
  }
  int terminal_segment() const { return grid.n_knots - 1; }
  double newest_knot_time() const { return grid.knot_time(grid.n_knots); }
  double penultimate_knot_time() const { return grid.knot_time(grid.n_knots - 1); }
};

// State transition appending c_{n+1} = 2 c_{n-1} - c_{n-3}: shifts the window
// one knot forward while preserving the spline's velocity at the joint knot.
Eigen::MatrixXd build_transition(int d);

// A * x without materializing the matrix.
Eigen::VectorXd apply_transition(const Eigen::VectorXd& x, int d);

// Process noise: omega on the three retained control points, nu on the newly
// appended one; an explicit full-matrix override takes precedence.
struct ProcessNoiseSpec {
  double omega = 0.0;
  double nu = 0.0;
  std::optional<Eigen::MatrixXd> override_matrix;
};

Eigen::MatrixXd build_process_noise(const ProcessNoiseSpec& spec, int d);

// b(s(t_z)) with s interpolated from the state's terminal segment at the
// model's kinematic order.
Eigen::VectorXd predict_measurement(const SensorModel& model, const RcpState& state, double t_z);

}  // namespace sere
