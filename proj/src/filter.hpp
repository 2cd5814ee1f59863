#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "model.hpp"
#include "spline.hpp"

namespace sere {

struct FilterConfig {
  int dim = 2;
  double tau = 0.1;
  ProcessNoiseSpec process_noise;
  double sigma0 = 1.0;                // initial control-point std deviation
  std::map<Modality, double> gate;    // per-modality squared Mahalanobis threshold
  std::optional<Eigen::VectorXd> initial_position;  // required for range-only streams
};

struct FilterStepReport {
  double t = 0.0;
  Modality modality = Modality::LinearPosition;
  bool accepted = true;
  bool stale = false;
  bool propagated = false;  // whether the knot count advanced for this record
  int knot_advances = 0;
  Eigen::VectorXd predicted;
  Eigen::VectorXd innovation;
  Eigen::MatrixXd innovation_cov;
  double mahalanobis_sq = 0.0;
};

struct MotionPosterior {
  Eigen::VectorXd mean;  // stacked queried kinematics (dm)
  Eigen::MatrixXd cov;   // dm x dm
  std::vector<KinematicQuery> queries;
};

// Anchor table plus per-modality noise; turns a measurement record into the
// sensor model that explains it.
struct ModalityBank {
  std::map<Modality, Eigen::MatrixXd> noise;
  std::vector<Eigen::VectorXd> anchors;

  SensorModel model_for(const MeasurementRecord& rec) const;
};

struct RunOptions {
  bool skip_stale = false;
  bool record_step_posteriors = false;  // position posterior at each accepted update
};

struct StepPosterior {
  double t = 0.0;
  Eigen::VectorXd mean;  // interpolated position
  Eigen::MatrixXd cov;   // its d x d covariance
};

struct RunResult {
  std::vector<FilterStepReport> reports;
  std::vector<StepPosterior> step_posteriors;
  int updates = 0;
  int rejected = 0;       // gated out
  int stale_skipped = 0;  // only with RunOptions::skip_stale
};

// Recursive spline-state estimator. The state holds the four most recent
// control points; each measurement either lands in the terminal knot segment
// (pure update) or first advances the knot grid one interval at a time,
// archiving every control point that leaves the window.
class Filter {
 public:
  explicit Filter(FilterConfig config);

  bool initialized() const { return initialized_; }

  // Replicates `position` across all four control points, with grid origin
  // t_first - 3*tau so t_first is the newest knot, and covariance sigma0^2*I.
  void initialize(double t_first, const Eigen::VectorXd& position);

  // One recursion step. Throws StaleMeasurement when z.t lies at or before
  // the penultimate knot, SingularInnovation when the innovation covariance
  // is not positive definite.
  FilterStepReport step(const MeasurementRecord& z, const SensorModel& model);

  // H = J_b(s(t_z)) * Lambda(t_z) for the current state.
  Eigen::MatrixXd observation_matrix(const SensorModel& model, double t_z) const;

  // Joint mean/covariance of interpolated kinematics; all query timestamps
  // must lie in the terminal segment.
  MotionPosterior interpolate_posterior(const std::vector<KinematicQuery>& queries) const;

  // Sequential application over a sorted stream. When the filter is not yet
  // initialized, uses config.initial_position at the first record's
  // timestamp if provided, otherwise consumes the first linear-position
  // record as the anchor (InsufficientInitData if the stream has none).
  RunResult run(const std::vector<MeasurementRecord>& stream, const ModalityBank& bank,
                const RunOptions& options = {});

  const RcpState& state() const { return state_; }
  const FilterConfig& config() const { return config_; }

  // All control points produced so far (archived + the live window), as a
  // spline over the run's full time span.
  ControlPolygon control_polygon() const;
  int total_control_points() const {
    return static_cast<int>(archived_.size()) + (initialized_ ? 4 : 0);
  }

 private:
  int propagate_to(double t);  // returns number of knot advances

  FilterConfig config_;
  Eigen::MatrixXd transition_;
  Eigen::MatrixXd process_noise_;
  RcpState state_;
  std::vector<Eigen::VectorXd> archived_;
  bool initialized_ = false;
};

// Mahalanobis acceptance test: true iff innovation' * S^-1 * innovation is
// strictly below threshold_sq.
bool gate_accepts(const Eigen::VectorXd& innovation, const Eigen::MatrixXd& innovation_cov,
                  double threshold_sq);

// Builds the initial state per the replicate-first-position policy without a
// Filter instance (exposed for tests and the C API).
RcpState make_initial_state(const FilterConfig& config, double t_first,
                            const Eigen::VectorXd& position);

}  // namespace sere
