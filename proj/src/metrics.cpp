#include "metrics.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <string>

namespace sere {

RmseReport rmse(const std::vector<Eigen::VectorXd>& estimates,
                const std::vector<Eigen::VectorXd>& truth) {
  if (estimates.size() != truth.size()) {
    raise(Errc::LengthMismatch, "estimate/truth lengths differ: " +
                                    std::to_string(estimates.size()) + " vs " +
                                    std::to_string(truth.size()));
  }
  if (estimates.empty()) raise(Errc::LengthMismatch, "empty series");

  const auto d = estimates.front().size();
  RmseReport report;
  report.per_axis = Eigen::VectorXd::Zero(d);
  report.samples = static_cast<int>(estimates.size());
  double sum_sq = 0.0;
  for (size_t i = 0; i < estimates.size(); ++i) {
    if (estimates[i].size() != d || truth[i].size() != d) {
      raise(Errc::LengthMismatch, "dimension mismatch inside the series");
    }
    const Eigen::VectorXd e = estimates[i] - truth[i];
    sum_sq += e.squaredNorm();
    report.per_axis += e.cwiseAbs2();
    report.max_error = std::max(report.max_error, e.norm());
  }
  const double n = static_cast<double>(estimates.size());
  report.overall = std::sqrt(sum_sq / n);
  report.per_axis = (report.per_axis / n).cwiseSqrt();
  return report;
}

double chi2_quantile(double probability, int dof) {
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(dist, probability);
}

AneesReport anees(const std::vector<Eigen::VectorXd>& errors,
                  const std::vector<Eigen::MatrixXd>& covariances) {
  if (errors.size() != covariances.size()) {
    raise(Errc::LengthMismatch, "errors/covariances lengths differ");
  }
  if (errors.empty()) raise(Errc::LengthMismatch, "empty series");

  const int d = static_cast<int>(errors.front().size());
  const int m = static_cast<int>(errors.size());
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const Eigen::MatrixXd& cov = covariances[static_cast<size_t>(i)];
    if (cov.rows() != d || cov.cols() != d || errors[static_cast<size_t>(i)].size() != d) {
      raise(Errc::LengthMismatch, "dimension mismatch inside the series");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success || cov.diagonal().minCoeff() <= 0.0) {
      raise(Errc::SingularCovariance, "covariance " + std::to_string(i) + " not positive definite");
    }
    total += errors[static_cast<size_t>(i)].dot(llt.solve(errors[static_cast<size_t>(i)]));
  }

  AneesReport report;
  report.dof = d * m;
  report.anees = total / report.dof;
  report.lower = chi2_quantile(0.025, report.dof) / report.dof;
  report.upper = chi2_quantile(0.975, report.dof) / report.dof;
  return report;
}

std::vector<double> crlb_linear(const LinearSystem& system, int horizon, int trace_dim) {
  Eigen::MatrixXd p = system.p0;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(p.rows(), p.cols());
  std::vector<double> out;
  out.reserve(static_cast<size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    if (k > 0) p = system.f * p * system.f.transpose() + system.q;
    const Eigen::MatrixXd s = system.h * p * system.h.transpose() + system.r;
    const Eigen::MatrixXd gain =
        s.ldlt().solve((p * system.h.transpose()).transpose()).transpose();
    p = (identity - gain * system.h) * p;
    p = 0.5 * (p + p.transpose()).eval();
    out.push_back(p.topLeftCorner(trace_dim, trace_dim).trace());
  }
  return out;
}

LinearSystem case_study_cv_system(double T, double accel_var, double r_var) {
  LinearSystem sys;
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  sys.f = Eigen::MatrixXd::Identity(4, 4);
  sys.f.topRightCorner(2, 2) = T * id;
  Eigen::MatrixXd g(4, 2);
  g.topRows(2) = 0.5 * T * T * id;
  g.bottomRows(2) = T * id;
  sys.q = g * (accel_var * id) * g.transpose();
  sys.h = Eigen::MatrixXd::Zero(2, 4);
  sys.h.leftCols(2) = id;
  sys.r = r_var * id;
  sys.p0 = Eigen::MatrixXd::Zero(4, 4);
  return sys;
}

}  // namespace sere
