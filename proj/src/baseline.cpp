#include "baseline.hpp"

#include <cmath>
#include <string>

namespace sere {

BaselineEkf::BaselineEkf(BaselineConfig config) : config_(std::move(config)) {
  if (config_.dim < 1) raise(Errc::InvalidArgument, "dimension must be >= 1");
  accel_noise_ = config_.accel_var * Eigen::MatrixXd::Identity(config_.dim, config_.dim);
}

void BaselineEkf::initialize(double t0, const Eigen::VectorXd& position) {
  const int d = config_.dim;
  if (position.size() != d) raise(Errc::DimensionMismatch, "initial position dimension mismatch");
  x_ = Eigen::VectorXd::Zero(2 * d);
  x_.head(d) = position;
  p_ = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  p_.topLeftCorner(d, d) = config_.sigma0_pos * config_.sigma0_pos * Eigen::MatrixXd::Identity(d, d);
  p_.bottomRightCorner(d, d) =
      config_.sigma0_vel * config_.sigma0_vel * Eigen::MatrixXd::Identity(d, d);
  accel_input_ = Eigen::VectorXd::Zero(d);
  t_last_ = t0;
  initialized_ = true;
  history_.clear();
}

void BaselineEkf::propagate(double t) {
  const int d = config_.dim;
  const double dt = t - t_last_;
  if (dt <= 0.0) return;
  Eigen::MatrixXd f = Eigen::MatrixXd::Identity(2 * d, 2 * d);
  f.topRightCorner(d, d) = dt * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd g(2 * d, d);
  g.topRows(d) = 0.5 * dt * dt * Eigen::MatrixXd::Identity(d, d);
  g.bottomRows(d) = dt * Eigen::MatrixXd::Identity(d, d);

  x_.head(d) += dt * x_.tail(d) + 0.5 * dt * dt * accel_input_;
  x_.tail(d) += dt * accel_input_;
  p_ = f * p_ * f.transpose() + g * accel_noise_ * g.transpose();
  t_last_ = t;
}

void BaselineEkf::ingest(const MeasurementRecord& rec, const ModalityBank& bank) {
  if (!initialized_) raise(Errc::InsufficientInitData, "baseline not initialized");
  const int d = config_.dim;
  propagate(rec.t);

  switch (rec.modality) {
    case Modality::Accelerometer: {
      accel_input_ = rec.value;
      if (auto it = bank.noise.find(Modality::Accelerometer); it != bank.noise.end()) {
        accel_noise_ = it->second;
      }
      break;
    }
    case Modality::LinearPosition:
    case Modality::Toa:
    case Modality::Tdoa: {
      const SensorModel model = bank.model_for(rec);
      const Eigen::VectorXd pos = x_.head(d);
      const Eigen::VectorXd predicted = model.predict(pos);
      Eigen::MatrixXd h(predicted.size(), 2 * d);
      h.setZero();
      h.leftCols(d) = model.jacobian(pos);
      Eigen::MatrixXd s = h * p_ * h.transpose() + model.noise_cov;
      s = 0.5 * (s + s.transpose()).eval();
      Eigen::LLT<Eigen::MatrixXd> llt(s);
      if (llt.info() != Eigen::Success || s.diagonal().minCoeff() < 1e-12) {
        raise(Errc::SingularInnovation, "baseline innovation covariance not positive definite");
      }
      const Eigen::MatrixXd gain = llt.solve((p_ * h.transpose()).transpose()).transpose();
      x_ += gain * (rec.value - predicted);
      p_ = (Eigen::MatrixXd::Identity(2 * d, 2 * d) - gain * h) * p_;
      p_ = 0.5 * (p_ + p_.transpose()).eval();
      break;
    }
  }
  history_.push_back({rec.t, x_.head(d), x_.tail(d), p_.topLeftCorner(d, d).trace()});
}

void BaselineEkf::run(const std::vector<MeasurementRecord>& stream, const ModalityBank& bank) {
  for (const auto& rec : stream) ingest(rec, bank);
}

Eigen::VectorXd BaselineEkf::position_at(double t) const {
  if (history_.empty()) raise(Errc::InsufficientInitData, "baseline has no stored states");
  if (t < history_.front().t || t > history_.back().t) {
    raise(Errc::OutOfSegment, "t=" + std::to_string(t) + " outside baseline history span");
  }
  // Binary search for the bracketing pair.
  size_t lo = 0;
  size_t hi = history_.size() - 1;
  while (hi - lo > 1) {
    const size_t mid = (lo + hi) / 2;
    if (history_[mid].t <= t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const BaselineEstimate& a = history_[lo];
  const BaselineEstimate& b = history_[hi];
  if (b.t == a.t) return a.pos;
  const double w = (t - a.t) / (b.t - a.t);
  return (1.0 - w) * a.pos + w * b.pos;
}

}  // namespace sere
