#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sere {

Eigen::Vector2d LissajousSpec::position(double t) const {
  return {amp_x * std::sin(freq_a * t + phase), amp_y * std::sin(freq_b * t)};
}

Eigen::Vector2d LissajousSpec::velocity(double t) const {
  return {amp_x * freq_a * std::cos(freq_a * t + phase), amp_y * freq_b * std::cos(freq_b * t)};
}

Eigen::Vector2d LissajousSpec::acceleration(double t) const {
  return {-amp_x * freq_a * freq_a * std::sin(freq_a * t + phase),
          -amp_y * freq_b * freq_b * std::sin(freq_b * t)};
}

namespace {

Eigen::Vector3d flight_omegas(const Flight3dSpec& f) {
  return {2.0 * std::numbers::pi / f.periods[0], 2.0 * std::numbers::pi / f.periods[1],
          2.0 * std::numbers::pi / f.periods[2]};
}

}  // namespace

Eigen::Vector3d Flight3dSpec::position(double t) const {
  const Eigen::Vector3d w = flight_omegas(*this);
  return {amplitudes[0] * std::sin(w[0] * t + phase), amplitudes[1] * std::sin(w[1] * t),
          z_offset + amplitudes[2] * std::sin(w[2] * t)};
}

Eigen::Vector3d Flight3dSpec::velocity(double t) const {
  const Eigen::Vector3d w = flight_omegas(*this);
  return {amplitudes[0] * w[0] * std::cos(w[0] * t + phase),
          amplitudes[1] * w[1] * std::cos(w[1] * t), amplitudes[2] * w[2] * std::cos(w[2] * t)};
}

Eigen::Vector3d Flight3dSpec::acceleration(double t) const {
  const Eigen::Vector3d w = flight_omegas(*this);
  return {-amplitudes[0] * w[0] * w[0] * std::sin(w[0] * t + phase),
          -amplitudes[1] * w[1] * w[1] * std::sin(w[1] * t),
          -amplitudes[2] * w[2] * w[2] * std::sin(w[2] * t)};
}

std::vector<TruthSample> simulate_cv_truth(const CvTruthConfig& config, Rng& rng) {
  if (config.T <= 0.0) raise(Errc::InvalidArgument, "sample period must be positive");
  if (config.steps < 1) raise(Errc::InvalidArgument, "need at least one sample");

  Eigen::LLT<Eigen::Matrix2d> llt(config.accel_noise_cov);
  if (llt.info() != Eigen::Success && !config.accel_noise_cov.isZero()) {
    raise(Errc::NegativeVariance, "acceleration noise covariance must be PSD");
  }
  const Eigen::Matrix2d noise_sqrt =
      config.accel_noise_cov.isZero() ? Eigen::Matrix2d::Zero() : Eigen::Matrix2d(llt.matrixL());

  std::vector<TruthSample> out;
  out.reserve(static_cast<size_t>(config.steps));
  Eigen::Vector2d s = config.initial_position;
  Eigen::Vector2d v = config.initial_velocity;
  const double T = config.T;
  for (int k = 0; k < config.steps; ++k) {
    const double t = k * T;  // index arithmetic, no accumulation drift
    const Eigen::Vector2d a_in =
        config.accel_input ? config.accel_input(t) : Eigen::Vector2d::Zero();
    const Eigen::Vector2d a = a_in + noise_sqrt * rng.gauss_vector(2);
    TruthSample sample;
    sample.t = t;
    sample.pos = s;
    sample.vel = v;
    sample.acc = a;
    out.push_back(std::move(sample));
    s += T * v + 0.5 * T * T * a;
    v += T * a;
  }
  return out;
}

std::function<Eigen::Vector2d(double)> lissajous_accel_schedule(const LissajousSpec& spec) {
  return [spec](double t) { return spec.acceleration(t); };
}

std::vector<TruthSample> make_truth(const ScenarioConfig& scenario, uint64_t seed) {
  const int n = static_cast<int>(std::llround(scenario.duration * scenario.truth_rate)) + 1;
  if (scenario.kind == ScenarioConfig::Kind::LissajousCv) {
    CvTruthConfig cv;
    cv.T = 1.0 / scenario.truth_rate;
    cv.steps = n;
    cv.initial_position = scenario.lissajous.position(0.0);
    cv.initial_velocity = scenario.lissajous.velocity(0.0);
    cv.accel_noise_cov = scenario.accel_noise_var * Eigen::Matrix2d::Identity();
    cv.accel_input = lissajous_accel_schedule(scenario.lissajous);
    Rng rng(derive_seed(seed, "truth"));
    return simulate_cv_truth(cv, rng);
  }
  // Deterministic 3-D flight: every Monte Carlo run tracks the same curve.
  std::vector<TruthSample> out;
  out.reserve(static_cast<size_t>(n));
  const double T = 1.0 / scenario.truth_rate;
  for (int k = 0; k < n; ++k) {
    const double t = k * T;
    TruthSample s;
    s.t = t;
    s.pos = scenario.flight.position(t);
    s.vel = scenario.flight.velocity(t);
    s.acc = scenario.flight.acceleration(t);
    out.push_back(std::move(s));
  }
  return out;
}

TruthSample interpolate_truth(const std::vector<TruthSample>& truth, double t) {
  if (truth.empty() || t < truth.front().t || t > truth.back().t) {
    raise(Errc::ScheduleOutOfRange, "schedule time " + std::to_string(t) + " outside truth horizon");
  }
  const double t0 = truth.front().t;
  const double step = truth.size() > 1 ? truth[1].t - truth[0].t : 1.0;
  size_t j = std::min(static_cast<size_t>(std::max(0.0, std::floor((t - t0) / step))),
                      truth.size() - 1);
  while (j + 1 < truth.size() && truth[j + 1].t <= t) ++j;
  while (j > 0 && truth[j].t > t) --j;
  if (j + 1 >= truth.size()) {
    return truth.back();
  }
  const TruthSample& a = truth[j];
  const TruthSample& b = truth[j + 1];
  const double w = (t - a.t) / (b.t - a.t);
  TruthSample r;
  r.t = t;
  r.pos = (1.0 - w) * a.pos + w * b.pos;
  r.vel = (1.0 - w) * a.vel + w * b.vel;
  r.acc = (1.0 - w) * a.acc + w * b.acc;
  return r;
}

namespace {

struct TruthInterp {
  const std::vector<TruthSample>& truth;

  TruthSample at(double t) const { return interpolate_truth(truth, t); }
};

Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& r) {
  if (r.isZero()) return Eigen::MatrixXd::Zero(r.rows(), r.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) {
    raise(Errc::NegativeVariance, "sensor noise covariance must be PSD");
  }
  return llt.matrixL();
}

}  // namespace

std::vector<MeasurementRecord> sample_measurements(const std::vector<TruthSample>& truth,
                                                   const ScenarioConfig& scenario, uint64_t seed) {
  const TruthInterp interp{truth};
  const int n_anchors = static_cast<int>(scenario.anchors.size());
  Rng outlier_rng(derive_seed(seed, "outlier"));
  const auto outlier_applies = [&](Modality m) {
    return std::find(scenario.outliers.modalities.begin(), scenario.outliers.modalities.end(),
                     m) != scenario.outliers.modalities.end();
  };

  // (sensor index, record) pairs so ties at equal timestamps keep config order.
  std::vector<std::pair<size_t, MeasurementRecord>> tagged;
  for (size_t si = 0; si < scenario.sensors.size(); ++si) {
    const SensorSpec& sensor = scenario.sensors[si];
    if (sensor.rate <= 0.0) raise(Errc::InvalidArgument, "sensor rate must be positive");
    const double stop = sensor.stop < 0.0 ? scenario.duration : sensor.stop;
    Rng rng(derive_seed(seed, modality_token(sensor.modality)));
    const Eigen::MatrixXd noise_sqrt = covariance_sqrt(sensor.noise);
    const long count = static_cast<long>(std::floor((stop - sensor.start) * sensor.rate + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) {
      const double t = sensor.start + static_cast<double>(k) / sensor.rate;
      const TruthSample s = interp.at(t);
      MeasurementRecord rec;
      rec.t = t;
      rec.modality = sensor.modality;
      switch (sensor.modality) {
        case Modality::LinearPosition:
          rec.value = s.pos + noise_sqrt * rng.gauss_vector(static_cast<int>(s.pos.size()));
          break;
        case Modality::Accelerometer:
          rec.value = s.acc + noise_sqrt * rng.gauss_vector(static_cast<int>(s.acc.size()));
          break;
        case Modality::Toa: {
          if (n_anchors < 1) raise(Errc::InvalidArgument, "ToA sensors need an anchor table");
          rec.anchor_i = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n_anchors)));
          const double range = (s.pos - scenario.anchors[rec.anchor_i]).norm();
          rec.value = Eigen::VectorXd::Constant(1, range + noise_sqrt(0, 0) * rng.gauss());
          break;
        }
        case Modality::Tdoa: {
          if (n_anchors < 2) raise(Errc::InvalidArgument, "TDoA sensors need >= 2 anchors");
          rec.anchor_i = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n_anchors)));
          int j = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n_anchors - 1)));
          if (j >= rec.anchor_i) ++j;
          rec.anchor_j = j;
          const double diff = (s.pos - scenario.anchors[rec.anchor_i]).norm() -
                              (s.pos - scenario.anchors[rec.anchor_j]).norm();
          rec.value = Eigen::VectorXd::Constant(1, diff + noise_sqrt(0, 0) * rng.gauss());
          break;
        }
      }
      if (scenario.outliers.probability > 0.0 && outlier_applies(sensor.modality) &&
          outlier_rng.chance(scenario.outliers.probability)) {
        double offset = scenario.outliers.offset;
        if (scenario.outliers.uniform_magnitude) {
          offset = scenario.outliers.offset_lo +
                   (scenario.outliers.offset_hi - scenario.outliers.offset_lo) *
                       outlier_rng.uniform();
        }
        rec.value.array() += offset;
        rec.outlier = true;
      }
      tagged.emplace_back(si, std::move(rec));
    }
  }

  std::stable_sort(tagged.begin(), tagged.end(), [](const auto& a, const auto& b) {
    if (a.second.t != b.second.t) return a.second.t < b.second.t;
    return a.first < b.first;
  });

  std::vector<MeasurementRecord> records;
  records.reserve(tagged.size());
  long seq = 0;
  for (auto& [si, rec] : tagged) {
    rec.seq = seq++;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace sere
