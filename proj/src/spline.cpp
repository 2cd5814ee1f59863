#include <algorithm>
#include "spline.hpp"

#include <cmath>
#include <string>

namespace sere {

const Eigen::Matrix4d& basis_matrix() {
  static const Eigen::Matrix4d omega = [] {
    Eigen::Matrix4d m;
    m << 1, -3, 3, -1,
         4, 0, -6, 3,
         1, 3, 3, -3,
         0, 0, 0, 1;
    return Eigen::Matrix4d(m / 6.0);
  }();
  return omega;
}

Eigen::Vector4d time_powers(double u, int order, double tau) {
  if (u < 0.0 || u > 1.0) raise(Errc::OutOfSegment, "normalized time " + std::to_string(u) + " outside [0,1]");
  if (tau <= 0.0) raise(Errc::InvalidArgument, "knot interval must be positive");
  switch (order) {
    case 0:
      return {1.0, u, u * u, u * u * u};
    case 1:
      return Eigen::Vector4d{0.0, 1.0, 2.0 * u, 3.0 * u * u} / tau;
    case 2:
      return Eigen::Vector4d{0.0, 0.0, 2.0, 6.0 * u} / (tau * tau);
    default:
      raise(Errc::InvalidArgument, "kinematic order must be 0, 1 or 2");
  }
}

Eigen::Vector4d basis_weights(double u, int order, double tau) {
  return basis_matrix() * time_powers(u, order, tau);
}

int KnotGrid::segment_for(double t) const {
  const double x = (t - t_origin) / tau;
  const double fl = std::floor(x);
  int i;
  if (x == fl) {
    // Exactly on a knot: belongs to the left segment (u = 1).
    i = static_cast<int>(fl);
  } else {
    i = static_cast<int>(fl) + 1;
  }
  // The quotient rounds, so the candidate can sit one segment off the one the
  // half-open membership test t in (knot_time(i), knot_time(i+1)] accepts.
  // Nudge against the same knot-time expressions every caller validates with.
  i = std::max(1, std::min(i, n_knots - 1));
  while (i > 1 && t <= knot_time(i)) --i;
  while (i + 1 < n_knots && t > knot_time(i + 1)) ++i;
  if (!(t > knot_time(i)) || !(t <= knot_time(i + 1))) {
    raise(Errc::OutOfSegment,
          "t=" + std::to_string(t) + " outside covered span (" + std::to_string(knot_time(1)) +
              ", " + std::to_string(knot_time(n_knots)) + "]");
  }
  return i;
}

NormalizedTime normalized_time(const KnotGrid& grid, double t, int segment_index) {
  if (segment_index < 1 || segment_index + 1 > grid.n_knots) {
    raise(Errc::OutOfSegment, "segment index " + std::to_string(segment_index) + " outside grid");
  }
  const double ti = grid.knot_time(segment_index);
  // The upper bound must be the knot-time expression itself so membership
  // agrees bit-for-bit with every other boundary decision on the grid;
  // ti + tau can land one ulp away from knot_time(segment_index + 1).
  const double hi = grid.knot_time(segment_index + 1);
  if (!(t > ti) || !(t <= hi)) {
    raise(Errc::OutOfSegment, "t=" + std::to_string(t) + " outside segment (" +
                                  std::to_string(ti) + ", " + std::to_string(hi) + "]");
  }
  // The quotient can overshoot 1 by an ulp when t sits exactly on the upper
  // knot; clamp so downstream callers see a valid segment coordinate.
  return NormalizedTime{std::min((t - ti) / grid.tau, 1.0), grid.tau};
}

Eigen::VectorXd interpolate(const Eigen::MatrixXd& segment_points, const NormalizedTime& nt,
                            int order) {
  if (segment_points.cols() != 4) {
    raise(Errc::DimensionMismatch, "segment needs exactly 4 control points, got " +
                                       std::to_string(segment_points.cols()));
  }
  return segment_points * basis_weights(nt.u, order, nt.tau);
}

Eigen::VectorXd interpolate(const std::vector<Eigen::VectorXd>& segment_points,
                            const NormalizedTime& nt, int order) {
  if (segment_points.size() != 4) {
    raise(Errc::DimensionMismatch,
          "segment needs exactly 4 control points, got " + std::to_string(segment_points.size()));
  }
  const auto d = segment_points[0].size();
  Eigen::MatrixXd c(d, 4);
  for (int j = 0; j < 4; ++j) {
    if (segment_points[j].size() != d) {
      raise(Errc::DimensionMismatch, "control point dimensions disagree");
    }
    c.col(j) = segment_points[j];
  }
  return interpolate(c, nt, order);
}

Eigen::MatrixXd coefficient_matrix(const NormalizedTime& nt, int order, int d) {
  if (d < 1) raise(Errc::InvalidArgument, "dimension must be >= 1");
  const Eigen::Vector4d w = basis_weights(nt.u, order, nt.tau);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(d, 4 * d);
  for (int j = 0; j < 4; ++j) {
    lambda.block(0, j * d, d, d) = w[j] * Eigen::MatrixXd::Identity(d, d);
  }
  return lambda;
}

Eigen::MatrixXd batch_coefficient_matrix(const std::vector<KinematicQuery>& queries,
                                         const KnotGrid& grid, int segment_index, int d) {
  Eigen::MatrixXd stacked(static_cast<int>(queries.size()) * d, 4 * d);
  int row = 0;
  for (const auto& q : queries) {
    const NormalizedTime nt = normalized_time(grid, q.t, segment_index);
    stacked.block(row, 0, d, 4 * d) = coefficient_matrix(nt, q.order, d);
    row += d;
  }
  return stacked;
}

ControlPolygon::ControlPolygon(double t_origin, double tau, std::vector<Eigen::VectorXd> points)
    : grid_(t_origin, tau, std::max<int>(4, static_cast<int>(points.size()))),
      points_(std::move(points)) {
  if (points_.size() < 4) {
    raise(Errc::DimensionMismatch, "control polygon needs at least 4 points");
  }
  grid_.n_knots = static_cast<int>(points_.size());
  dim_ = static_cast<int>(points_[0].size());
  for (const auto& p : points_) {
    if (p.size() != dim_) raise(Errc::DimensionMismatch, "control point dimensions disagree");
  }
}

Eigen::VectorXd ControlPolygon::evaluate(double t, int order) const {
  int i = grid_.segment_for(t);
  // Interpolation also needs c_{i-2} and c_{i+1}; the first two segments of
  // the grid have no full support.
  if (i < 3) raise(Errc::OutOfSegment, "t=" + std::to_string(t) + " before covered span");
  const NormalizedTime nt = normalized_time(grid_, t, i);
  Eigen::MatrixXd c(dim_, 4);
  for (int j = 0; j < 4; ++j) c.col(j) = points_[static_cast<size_t>(i - 3 + j)];
  return interpolate(c, nt, order);
}

}  // namespace sere
