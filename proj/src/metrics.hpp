#pragma once

#include <Eigen/Dense>
#include <vector>

#include "error.hpp"

namespace sere {

struct RmseReport {
  double overall = 0.0;
  Eigen::VectorXd per_axis;
  double max_error = 0.0;
  int samples = 0;
};

// Root-mean-square Euclidean error plus per-axis and max; LengthMismatch when
// the two series disagree in length.
RmseReport rmse(const std::vector<Eigen::VectorXd>& estimates,
                const std::vector<Eigen::VectorXd>& truth);

struct AneesReport {
  double anees = 0.0;
  double lower = 0.0;   // 95% band, chi-square with d*m dof scaled by 1/(d*m)
  double upper = 0.0;
  int dof = 0;
};

// Average normalized estimation error squared over m (error, covariance)
// pairs: (1/(d m)) * sum e_i' Cov_i^-1 e_i, with its 95% chi-square band.
AneesReport anees(const std::vector<Eigen::VectorXd>& errors,
                  const std::vector<Eigen::MatrixXd>& covariances);

// Chi-square quantile helper (probability in (0,1)).
double chi2_quantile(double probability, int dof);

// Linear-Gaussian system for the lower-bound recursion.
struct LinearSystem {
  Eigen::MatrixXd f;   // state transition
  Eigen::MatrixXd q;   // process noise
  Eigen::MatrixXd h;   // measurement matrix
  Eigen::MatrixXd r;   // measurement noise
  Eigen::MatrixXd p0;  // prior covariance at the first measurement instant
};

// Exact Kalman posterior covariance of the true linear-Gaussian model — the
// estimation lower bound for any estimator of that model. Entry k holds the
// trace of the leading trace_dim x trace_dim covariance block after the
// (k+1)-th measurement update (predictions applied between updates).
std::vector<double> crlb_linear(const LinearSystem& system, int horizon, int trace_dim);

// The discrete constant-velocity system of the planar case study: state
// [position; velocity] in R^4, acceleration disturbance of variance
// accel_var per axis, position measured with variance r_var per axis.
LinearSystem case_study_cv_system(double T, double accel_var, double r_var);

}  // namespace sere
