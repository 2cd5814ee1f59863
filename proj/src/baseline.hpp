#pragma once

#include <Eigen/Dense>
#include <vector>

#include "filter.hpp"
#include "model.hpp"

namespace sere {

// Discrete-time constant-velocity EKF used as the comparison baseline: state
// [position; velocity], accelerometer readings latched as the propagation
// input (held constant over each sampling interval), range/position records
// applied as standard EKF updates.
struct BaselineConfig {
  int dim = 3;
  double sigma0_pos = 1.0;
  double sigma0_vel = 1.0;
  double accel_var = 1.0;  // process-noise accel variance when no acc noise is configured
};

struct BaselineEstimate {
  double t = 0.0;
  Eigen::VectorXd pos;
  Eigen::VectorXd vel;
  double cov_trace = 0.0;  // trace of the position covariance block
};

class BaselineEkf {
 public:
  BaselineEkf(BaselineConfig config);

  void initialize(double t0, const Eigen::VectorXd& position);
  bool initialized() const { return initialized_; }

  // Processes one record: propagates to rec.t with the held acceleration
  // input, then latches (acc) or updates (gps/toa/tdoa). Stores one posterior
  // per record.
  void ingest(const MeasurementRecord& rec, const ModalityBank& bank);

  void run(const std::vector<MeasurementRecord>& stream, const ModalityBank& bank);

  const std::vector<BaselineEstimate>& history() const { return history_; }
  size_t stored_states() const { return history_.size(); }

  // Linear interpolation of the stored posteriors at time t (clamped inside
  // the history span is the caller's job; throws outside it).
  Eigen::VectorXd position_at(double t) const;

 private:
  void propagate(double t);

  BaselineConfig config_;
  Eigen::VectorXd x_;  // [p; v]
  Eigen::MatrixXd p_;
  Eigen::VectorXd accel_input_;
  Eigen::MatrixXd accel_noise_;  // R_acc driving the process noise
  double t_last_ = 0.0;
  bool initialized_ = false;
  std::vector<BaselineEstimate> history_;
};

}  // namespace sere
