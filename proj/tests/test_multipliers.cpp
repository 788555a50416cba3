#include <cmath>

#include "doctest.h"
#include "varcalc/multipliers.hpp"

using namespace varcalc;

namespace {

ControlSystem make_unicycle(const std::string& lagrangian) {
  SystemSpec spec;
  spec.state_names = {"x", "y"};
  spec.control_names = {"z1"};
  spec.psi = {"v*cos(z1)", "v*sin(z1)"};
  spec.lagrangian = lagrangian;
  spec.parameters = {{"v", 1.0}};
  return ControlSystem(spec);
}

ExtrinsicProblem make_speed_problem() {
  ExtrinsicSpec spec;
  spec.state_names = {"x", "y"};
  spec.free_lagrangian = "1";
  spec.constraints = {"xdot^2 + ydot^2 - v^2"};
  spec.parameters = {{"v", 1.0}};
  return ExtrinsicProblem(spec);
}

Eigen::VectorXd scalar(double value) { return Eigen::VectorXd::Constant(1, value); }

/// Straight eastward run of the unit-speed system with constant momenta.
ExtremalCandidate straight_candidate(const ControlSystem& sys, double px, double py,
                                     std::vector<double> corners = {}) {
  PiecewiseCurve curve = integrate_admissible(
      sys, Eigen::Vector2d(0.0, 0.0), 0.0, 1.0, corners,
      [](int, double) { return Eigen::VectorXd::Zero(1); });
  CovectorPath momenta;
  for (int s = 0; s < curve.arc_count(); ++s) {
    Eigen::MatrixXd p(curve.arc(s).steps() + 1, 2);
    p.col(0).setConstant(px);
    p.col(1).setConstant(py);
    momenta.p.push_back(p);
  }
  momenta.p0 = companion_momentum(sys, curve, momenta.p);
  ResidualReport residuals = extremal_residuals(sys, curve, momenta);
  return ExtremalCandidate{std::move(curve), std::move(momenta), residuals};
}

}  // namespace

TEST_CASE("constant multiplier of the straight unit-speed extremal") {
  ControlSystem sys = make_unicycle("1");
  ExtrinsicProblem ext = make_speed_problem();
  ExtremalCandidate cand = straight_candidate(sys, 1.0, 0.0);
  REQUIRE(cand.residuals.max_residual() < 1e-9);

  MultiplierPath path = recover_multipliers(ext, sys, cand);
  CHECK(path.residual < 1e-12);
  REQUIRE(path.lambda.size() == 1);
  for (int k = 0; k < path.lambda[0].rows(); k += 40) {
    CHECK(path.lambda[0](k, 0) == doctest::Approx(0.5).epsilon(1e-10));
  }

  CorrespondenceReport report = verify_correspondence(ext, sys, cand, path);
  CHECK(report.euler_lagrange < 1e-6);
  CHECK(report.constraint < 1e-10);
  CHECK(report.momentum_match < 1e-10);

  // Re-deriving the momenta from the recovered multipliers closes the loop.
  const Arc& arc = cand.curve.arc(0);
  for (int k = 0; k <= arc.steps(); k += 40) {
    const double t = arc.time_at(k);
    const Eigen::VectorXd q = arc.q.row(k).transpose();
    const Eigen::VectorXd qdot = sys.psi_value(t, q, arc.z.row(k).transpose());
    const Eigen::VectorXd rebuilt =
        ext.free_momentum(t, q, qdot) +
        ext.constraint_velocity_jacobian(t, q, qdot).transpose() *
            path.lambda[0].row(k).transpose();
    CHECK((rebuilt - cand.momenta.p[0].row(k).transpose()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("pointwise unsolvable momenta are rejected as inconsistent") {
  ControlSystem sys = make_unicycle("1");
  ExtrinsicProblem ext = make_speed_problem();
  // qdot = (1, 0) makes the y-equation read 1 = lambda * 0.
  ExtremalCandidate cand = straight_candidate(sys, 0.0, 1.0);
  CHECK_THROWS_AS(recover_multipliers(ext, sys, cand), InconsistentError);
}

TEST_CASE("multiplier recovery is a bijection given the momenta") {
  ControlSystem sys = make_unicycle("1");
  ExtrinsicProblem ext = make_speed_problem();

  // Build momenta from a known multiplier history on a turning curve and
  // recover it exactly.
  PiecewiseCurve turn = integrate_admissible(
      sys, Eigen::Vector2d(0.0, 0.0), 0.0, 1.5, {},
      [](int, double t) { return Eigen::VectorXd::Constant(1, t); });
  const auto known = [](double t) { return 0.3 + 0.1 * std::sin(t); };

  CovectorPath momenta;
  Eigen::MatrixXd p(turn.arc(0).steps() + 1, 2);
  for (int k = 0; k <= turn.arc(0).steps(); ++k) {
    const double t = turn.arc(0).time_at(k);
    const Eigen::VectorXd q = turn.arc(0).q.row(k).transpose();
    const Eigen::VectorXd qdot =
        sys.psi_value(t, q, turn.arc(0).z.row(k).transpose());
    p.row(k) = (ext.free_momentum(t, q, qdot) +
                known(t) * ext.constraint_velocity_jacobian(t, q, qdot).row(0).transpose())
                   .transpose();
  }
  momenta.p = {p};
  momenta.p0 = companion_momentum(sys, turn, momenta.p);
  ResidualReport residuals = extremal_residuals(sys, turn, momenta);
  ExtremalCandidate cand{turn, momenta, residuals};

  MultiplierPath path = recover_multipliers(ext, sys, cand);
  CHECK(path.residual < 1e-12);
  for (int k = 0; k <= turn.arc(0).steps(); k += 60) {
    CHECK(path.lambda[0](k, 0) ==
          doctest::Approx(known(turn.arc(0).time_at(k))).epsilon(1e-10));
  }

  // These momenta are not extremal, and the detector says so while the
  // pointwise recovery stays exact.
  CorrespondenceReport report = verify_correspondence(ext, sys, cand, path);
  CHECK(report.momentum_match < 1e-10);
  CHECK(report.euler_lagrange > 1e-3);
}

TEST_CASE("degenerate constraint gradients are reported") {
  SystemSpec spec;
  spec.state_names = {"x", "y"};
  spec.control_names = {"z1"};
  spec.psi = {"v*cos(z1)", "v*sin(z1)"};
  spec.lagrangian = "1";
  spec.parameters = {{"v", 1.0}};
  ControlSystem sys(spec);

  ExtrinsicSpec bad;
  bad.state_names = {"x", "y"};
  bad.free_lagrangian = "1";
  bad.constraints = {"(xdot - ydot)^2"};
  ExtrinsicProblem ext(bad);

  const double eighth_turn = std::acos(-1.0) / 4.0;
  PiecewiseCurve diag = integrate_admissible(
      sys, Eigen::Vector2d(0.0, 0.0), 0.0, 1.0, {},
      [&](int, double) { return scalar(eighth_turn); });
  CovectorPath momenta;
  momenta.p = {Eigen::MatrixXd::Zero(diag.arc(0).steps() + 1, 2)};
  momenta.p0 = companion_momentum(sys, diag, momenta.p);
  ExtremalCandidate cand{diag, momenta, extremal_residuals(sys, diag, momenta)};
  CHECK_THROWS_AS(recover_multipliers(ext, sys, cand), RankDeficiencyError);
}

TEST_CASE("curves violating the extrinsic constraints are rejected") {
  ControlSystem sys = make_unicycle("1");
  ExtrinsicSpec wrong;
  wrong.state_names = {"x", "y"};
  wrong.free_lagrangian = "1";
  wrong.constraints = {"xdot^2 + ydot^2 - 4"};
  ExtrinsicProblem ext(wrong);
  ExtremalCandidate cand = straight_candidate(sys, 1.0, 0.0);
  CHECK_THROWS_AS(recover_multipliers(ext, sys, cand), NotAdmissibleError);
}

TEST_CASE("vacuous constraint sets return empty multipliers") {
  SystemSpec spec;
  spec.state_names = {"x"};
  spec.control_names = {"z"};
  spec.psi = {"z"};
  spec.lagrangian = "z^2/2";
  ControlSystem sys(spec);

  ExtrinsicSpec free_spec;
  free_spec.state_names = {"x"};
  free_spec.free_lagrangian = "xdot^2/2";
  ExtrinsicProblem ext(free_spec);

  PiecewiseCurve line = integrate_admissible(
      sys, scalar(0.0), 0.0, 1.0, {}, [](int, double) { return scalar(1.0); });
  CovectorPath momenta;
  momenta.p = {Eigen::MatrixXd::Ones(line.arc(0).steps() + 1, 1)};
  momenta.p0 = companion_momentum(sys, line, momenta.p);
  ExtremalCandidate cand{line, momenta, extremal_residuals(sys, line, momenta)};

  MultiplierPath path = recover_multipliers(ext, sys, cand);
  CHECK(path.lambda[0].cols() == 0);
  CHECK(path.residual < 1e-12);

  CorrespondenceReport report = verify_correspondence(ext, sys, cand, path);
  CHECK(report.euler_lagrange < 1e-9);
  CHECK(report.momentum_match < 1e-12);
  CHECK(report.constraint == 0.0);
}

TEST_CASE("multi-arc paths glue the multiplier and energy checks") {
  ControlSystem sys = make_unicycle("1");
  ExtrinsicProblem ext = make_speed_problem();
  ExtremalCandidate cand = straight_candidate(sys, 1.0, 0.0, {0.375});
  REQUIRE(cand.curve.arc_count() == 2);

  MultiplierPath path = recover_multipliers(ext, sys, cand);
  for (int s = 0; s < 2; ++s) {
    for (int k = 0; k < path.lambda[static_cast<std::size_t>(s)].rows(); k += 30) {
      CHECK(path.lambda[static_cast<std::size_t>(s)](k, 0) ==
            doctest::Approx(0.5).epsilon(1e-10));
    }
  }
  CorrespondenceReport report = verify_correspondence(ext, sys, cand, path);
  CHECK(report.euler_lagrange < 1e-6);
  CHECK(report.corner_momentum < 1e-12);
  CHECK(report.corner_energy < 1e-12);
  CHECK(report.lambda_jump < 1e-12);
}
