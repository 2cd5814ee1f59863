#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

namespace sere {

// Planar Lissajous curve s(t) = (Ax sin(a t + phase), Ay sin(b t)).
struct LissajousSpec {
  double amp_x = 2.0;
  double amp_y = 2.0;
  double freq_a = 1.0;  // rad/s
  double freq_b = 2.0;  // rad/s
  double phase = 1.5707963267948966;

  Eigen::Vector2d position(double t) const;
  Eigen::Vector2d velocity(double t) const;
  Eigen::Vector2d acceleration(double t) const;
};

// Wandering 3-D flight: independent sinusoids per axis, parameterized by
// period (seconds per cycle); z oscillates around z_offset.
struct Flight3dSpec {
  Eigen::Vector3d amplitudes{2.5, 2.5, 0.8};
  Eigen::Vector3d periods{25.0, 17.0, 11.0};
  double phase = 1.5707963267948966;  // applied to the x axis
  double z_offset = 1.5;

  Eigen::Vector3d position(double t) const;
  Eigen::Vector3d velocity(double t) const;
  Eigen::Vector3d acceleration(double t) const;
};

struct TruthSample {
  double t = 0.0;
  Eigen::VectorXd pos;
  Eigen::VectorXd vel;
  Eigen::VectorXd acc;  // acceleration in effect over [t, t+T)
};

// Discrete constant-velocity truth driven by noisy acceleration input:
//   s_{k+1} = s_k + T v_k + (T^2/2)(a_k + w_k),  v_{k+1} = v_k + T (a_k + w_k)
// with w_k ~ N(0, accel_noise_cov).
struct CvTruthConfig {
  double T = 0.01;
  int steps = 601;  // number of samples, covering [0, (steps-1)*T]
  Eigen::Vector2d initial_position{0.0, 0.0};
  Eigen::Vector2d initial_velocity{0.0, 0.0};
  Eigen::Matrix2d accel_noise_cov = 0.25 * Eigen::Matrix2d::Identity();
  std::function<Eigen::Vector2d(double)> accel_input;  // a_k = f(t_k); empty = zero
};

std::vector<TruthSample> simulate_cv_truth(const CvTruthConfig& config, Rng& rng);

// Acceleration schedule a_k = d^2/dt^2 of the Lissajous curve, evaluated
// pointwise at the sample instants. Feeding the noise-free recursion with
// this input tracks the curve up to the integration bias of holding each
// sample constant over its interval.
std::function<Eigen::Vector2d(double)> lissajous_accel_schedule(const LissajousSpec& spec);

struct SensorSpec {
  Modality modality = Modality::LinearPosition;
  double rate = 100.0;       // Hz
  double start = 0.0;        // first sample time
  double stop = -1.0;        // last admissible sample time; -1 = scenario duration
  Eigen::MatrixXd noise;     // measurement covariance R
};

struct OutlierSpec {
  double probability = 0.0;
  double offset = 5.0;            // constant additive offset
  bool uniform_magnitude = false; // draw offset uniformly from [offset_lo, offset_hi]
  double offset_lo = 0.0;
  double offset_hi = 0.0;
  std::vector<Modality> modalities;  // which modalities can be contaminated
};

struct ScenarioConfig {
  enum class Kind { LissajousCv, Flight3d };
  Kind kind = Kind::LissajousCv;
  double duration = 6.0;
  double truth_rate = 100.0;  // truth sample rate (CV: 1/T)

  LissajousSpec lissajous;
  double accel_noise_var = 0.25;  // CV acceleration disturbance variance per axis

  Flight3dSpec flight;

  std::vector<Eigen::VectorXd> anchors;
  std::vector<SensorSpec> sensors;
  OutlierSpec outliers;

  std::optional<Eigen::VectorXd> initial_position;  // filter init for range-only streams
  double init_perturbation_std = 0.0;               // Monte Carlo init perturbation

  int dim() const { return kind == Kind::LissajousCv ? 2 : 3; }
};

// Ground truth for a scenario. The CV case consumes the "truth" random
// stream; the 3-D flight is deterministic (sampled analytically on the truth
// grid) so that Monte Carlo runs share one trajectory.
std::vector<TruthSample> make_truth(const ScenarioConfig& scenario, uint64_t seed);

// Samples every configured sensor schedule against linearly interpolated
// truth, applies the modality map and Gaussian noise, contaminates with
// outliers, and returns records sorted by (t, seq) with globally unique
// sequence ids. Outlier ground truth is carried on the record flag.
std::vector<MeasurementRecord> sample_measurements(const std::vector<TruthSample>& truth,
                                                   const ScenarioConfig& scenario, uint64_t seed);

// Linear interpolation between truth samples; ScheduleOutOfRange outside the
// recorded horizon.
TruthSample interpolate_truth(const std::vector<TruthSample>& truth, double t);

}  // namespace sere
