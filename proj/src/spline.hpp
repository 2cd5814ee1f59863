#pragma once

#include <Eigen/Dense>
#include <vector>

#include "error.hpp"

namespace sere {

// Uniform cubic B-spline machinery over d-dimensional control points.
//
// Conventions used throughout:
//  * Knots are 1-based: knot i sits at t_origin + (i-1)*tau, always computed
//    from the index (never by accumulating tau) so long runs cannot drift.
//  * Segment i spans the half-open interval (t_i, t_{i+1}] and is shaped by
//    the four control points c_{i-2}..c_{i+1}; a query landing exactly on a
//    knot belongs to the left segment with u = 1.
//  * Normalized time u = (t - t_i)/tau in (0, 1]; u = 0 is accepted by the
//    u-level helpers (handy for init and tests) but the t-level lookups
//    enforce the half-open rule.

// The constant 4x4 cubic basis matrix (row k holds the polynomial
// coefficients of basis weight k in powers of u).
const Eigen::Matrix4d& basis_matrix();

// Power vector of normalized time: order 0 -> [1,u,u^2,u^3],
// order 1 -> [0,1,2u,3u^2]/tau, order 2 -> [0,0,2,6u]/tau^2.
Eigen::Vector4d time_powers(double u, int order, double tau);

// The four spline weights Omega * time_powers(u, order, tau).
Eigen::Vector4d basis_weights(double u, int order, double tau);

struct KnotGrid {
  double t_origin = 0.0;
  double tau = 1.0;
  int n_knots = 4;

  KnotGrid() = default;
  KnotGrid(double origin, double tau_, int n) : t_origin(origin), tau(tau_), n_knots(n) {
    if (tau <= 0.0) raise(Errc::InvalidArgument, "knot interval must be positive");
    if (n_knots < 4) raise(Errc::InvalidArgument, "grid needs at least 4 knots");
  }

  double knot_time(int i) const { return t_origin + (i - 1) * tau; }

  // Left-knot index i of the segment containing t, i.e. t in (t_i, t_{i+1}].
  // Throws OutOfSegment when t <= t_1 or t > t_{n_knots}.
  int segment_for(double t) const;
};

struct NormalizedTime {
  double u = 0.0;
  double tau = 1.0;

  Eigen::Vector4d powers(int order) const { return time_powers(u, order, tau); }
};

// Normalized time of t inside segment `segment_index`; enforces the half-open
// segment rule (u in (0, 1]).
NormalizedTime normalized_time(const KnotGrid& grid, double t, int segment_index);

// Kinematic interpolation C_i * Omega * powers. `segment_points` is d x 4,
// columns ordered oldest to newest (c_{i-2}..c_{i+1}).
Eigen::VectorXd interpolate(const Eigen::MatrixXd& segment_points, const NormalizedTime& nt,
                            int order);

// Convenience overload taking the four control points individually.
Eigen::VectorXd interpolate(const std::vector<Eigen::VectorXd>& segment_points,
                            const NormalizedTime& nt, int order);

// Vectorized interpolation coefficients: the d x 4d matrix L with
// L * vec(C_i) == interpolate(C_i, nt, order). Block structure: four scalar
// weights each multiplying I_d.
Eigen::MatrixXd coefficient_matrix(const NormalizedTime& nt, int order, int d);

struct KinematicQuery {
  double t = 0.0;
  int order = 0;
};

// Row-stacked coefficient matrices for a batch of queries that all live in
// the same segment; mixed kinematic orders are allowed. Result is (sum of
// output dims) x 4d; every query contributes a d-row block in input order.
Eigen::MatrixXd batch_coefficient_matrix(const std::vector<KinematicQuery>& queries,
                                         const KnotGrid& grid, int segment_index, int d);

// A full control polygon c_1..c_N on a uniform grid; evaluates the spline on
// the covered domain (t_3, t_N]. Used for whole-trajectory queries once
// control points have been archived by the filter.
class ControlPolygon {
 public:
  ControlPolygon(double t_origin, double tau, std::vector<Eigen::VectorXd> points);

  int size() const { return static_cast<int>(points_.size()); }
  int dim() const { return dim_; }
  double tau() const { return grid_.tau; }
  double knot_time(int i) const { return grid_.knot_time(i); }
  // Earliest (exclusive) and latest (inclusive) valid query times.
  double t_begin() const { return grid_.knot_time(3); }
  double t_end() const { return grid_.knot_time(grid_.n_knots); }
  const std::vector<Eigen::VectorXd>& points() const { return points_; }

  Eigen::VectorXd evaluate(double t, int order) const;

 private:
  KnotGrid grid_;
  std::vector<Eigen::VectorXd> points_;
  int dim_ = 0;
};

}  // namespace sere
