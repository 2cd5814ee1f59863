#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "model.hpp"
#include "rng.hpp"

using namespace sere;

TEST_CASE("modality tokens round-trip and reject unknowns") {
  CHECK(std::string(modality_token(Modality::LinearPosition)) == "gps");
  CHECK(std::string(modality_token(Modality::Toa)) == "toa");
  CHECK(std::string(modality_token(Modality::Tdoa)) == "tdoa");
  CHECK(std::string(modality_token(Modality::Accelerometer)) == "acc");
  for (const char* token : {"gps", "toa", "tdoa", "acc"}) {
    CHECK(std::string(modality_token(parse_modality(token))) == token);
  }
  CHECK_THROWS_AS(parse_modality("sonar"), Error);
  try {
    parse_modality("sonar");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SchemaViolation);
  }
}

TEST_CASE("transition appends 2c3 - c1 (scalar example 1,2,3,4 -> 2,3,4,5)") {
  Eigen::VectorXd x(4);
  x << 1, 2, 3, 4;
  const Eigen::VectorXd shifted = apply_transition(x, 1);
  Eigen::VectorXd expected(4);
  expected << 2, 3, 4, 5;  // new point: 2*3 - 1 = 5
  CHECK((shifted - expected).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd a = build_transition(1);
  CHECK((a * x - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transition matrix equals its matrix-free application (randomized)") {
  Rng rng(3);
  for (int d : {1, 2, 3}) {
    const Eigen::MatrixXd a = build_transition(d);
    CHECK(a.rows() == 4 * d);
    CHECK(a.cols() == 4 * d);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::VectorXd x = rng.gauss_vector(4 * d);
      CHECK(((a * x) - apply_transition(x, d)).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("process noise block structure and override") {
  ProcessNoiseSpec spec;
  spec.omega = 0.3;
  spec.nu = 0.7;
  const Eigen::MatrixXd q = build_process_noise(spec, 2);
  CHECK(q.rows() == 8);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(8, 8);
  expected.topLeftCorner(6, 6) = 0.3 * Eigen::MatrixXd::Identity(6, 6);
  expected.bottomRightCorner(2, 2) = 0.7 * Eigen::MatrixXd::Identity(2, 2);
  CHECK((q - expected).cwiseAbs().maxCoeff() == 0.0);

  spec.override_matrix = Eigen::MatrixXd::Constant(8, 8, 0.125);
  const Eigen::MatrixXd forced = build_process_noise(spec, 2);
  CHECK((forced - *spec.override_matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("range sensor: prediction 5.0 and unit-vector Jacobian") {
  const Eigen::Vector3d anchor(0.0, 0.0, 0.0);
  const SensorModel toa = SensorModel::toa(0.01, anchor);
  CHECK(toa.kinematic_order == 0);
  CHECK(toa.output_dim(3) == 1);

  const Eigen::Vector3d s(3.0, 4.0, 0.0);
  CHECK(toa.predict(s)(0) == doctest::Approx(5.0).epsilon(1e-15));
  const Eigen::MatrixXd j = toa.jacobian(s);
  CHECK(j.rows() == 1);
  CHECK(j(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(j(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(j(0, 2) == 0.0);
}

TEST_CASE("range-difference sensor flips sign when anchors swap") {
  const Eigen::Vector2d a(0.0, 0.0);
  const Eigen::Vector2d b(4.0, 0.0);
  const Eigen::Vector2d s(1.0, 2.0);
  const SensorModel ab = SensorModel::tdoa(0.05, a, b);
  const SensorModel ba = SensorModel::tdoa(0.05, b, a);
  CHECK(ab.predict(s)(0) == doctest::Approx(-ba.predict(s)(0)).epsilon(1e-15));
  CHECK((ab.jacobian(s) + ba.jacobian(s)).cwiseAbs().maxCoeff() < 1e-15);

  // Against the closed form |s-a| - |s-b|.
  const double expect = (s - a).norm() - (s - b).norm();
  CHECK(ab.predict(s)(0) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("degenerate range geometry raises") {
  const Eigen::Vector2d anchor(1.0, 1.0);
  const SensorModel toa = SensorModel::toa(0.01, anchor);
  CHECK_THROWS_AS(toa.predict(Eigen::Vector2d(1.0, 1.0)), Error);
  try {
    toa.predict(Eigen::Vector2d(1.0, 1.0));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::AnchorCoincidesWithPosition);
  }
  try {
    toa.jacobian(Eigen::Vector2d(1.0 + 1e-14, 1.0));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SingularGeometry);
  }
}

TEST_CASE("sensor factories reject invalid noise") {
  CHECK_THROWS_AS(SensorModel::toa(-0.01, Eigen::Vector2d(0, 0)), Error);
  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(SensorModel::linear_position(bad), Error);
  try {
    SensorModel::toa(-0.01, Eigen::Vector2d(0, 0));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NegativeVariance);
  }
}

TEST_CASE("linear sensors are identity maps at their kinematic order") {
  const SensorModel gps = SensorModel::linear_position(0.01 * Eigen::Matrix2d::Identity());
  CHECK(gps.kinematic_order == 0);
  const SensorModel acc = SensorModel::accelerometer(0.01 * Eigen::Matrix3d::Identity());
  CHECK(acc.kinematic_order == 2);

  const Eigen::Vector2d s(0.5, -0.25);
  CHECK((gps.predict(s) - s).cwiseAbs().maxCoeff() == 0.0);
  CHECK((gps.jacobian(s) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("measurement prediction interpolates the terminal segment") {
  // State on a 2-D straight line: control points (k, 2k).
  const int d = 2;
  RcpState state;
  state.dim = d;
  state.grid = KnotGrid(0.0, 1.0, 5);  // terminal segment (3, 4]
  state.mean.resize(4 * d);
  for (int k = 0; k < 4; ++k) {
    state.mean(2 * k) = static_cast<double>(k);
    state.mean(2 * k + 1) = 2.0 * static_cast<double>(k);
  }
  state.cov = Eigen::MatrixXd::Identity(4 * d, 4 * d);
  CHECK(state.terminal_segment() == 4);
  CHECK(state.newest_knot_time() == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(state.penultimate_knot_time() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK((state.control_point(3) - Eigen::Vector2d(3.0, 6.0)).cwiseAbs().maxCoeff() == 0.0);

  // Linear precision: at t = 3.5 (u = 0.5) the curve passes through
  // (1.5, 3.0) because the control points are collinear with unit spacing.
  const SensorModel gps = SensorModel::linear_position(0.01 * Eigen::Matrix2d::Identity());
  const Eigen::VectorXd z = predict_measurement(gps, state, 3.5);
  CHECK(z(0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(z(1) == doctest::Approx(3.0).epsilon(1e-12));
}
