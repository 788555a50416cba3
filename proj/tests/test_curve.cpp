#include <cmath>
#include <sstream>

#include "doctest.h"
#include "varcalc/curve.hpp"

using namespace varcalc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ControlSystem unicycle() {
  SystemSpec spec;
  spec.state_names = {"x", "y"};
  spec.control_names = {"z"};
  spec.psi = {"v*cos(z)", "v*sin(z)"};
  spec.parameters = {{"v", 1.0}};
  return ControlSystem(spec);
}

// With z(t) = t the unicycle has the closed form
//   x(t) = sin t - sin t0,   y(t) = cos t0 - cos t.
PiecewiseCurve steering_curve(const ControlSystem& sys, double t0, double t1,
                              int density) {
  VectorXd q0 = VectorXd::Zero(2);
  return integrate_admissible(
      sys, q0, t0, t1, {},
      [](int, double t) { return VectorXd::Constant(1, t); }, density);
}

double steering_endpoint_error(const ControlSystem& sys, int density) {
  const double t0 = -1.0, t1 = 1.0;
  PiecewiseCurve curve = steering_curve(sys, t0, t1, density);
  const Arc& arc = curve.arc(0);
  double worst = 0.0;
  for (int k = 0; k <= arc.steps(); ++k) {
    const double t = arc.time_at(k);
    const double x = std::sin(t) - std::sin(t0);
    const double y = std::cos(t0) - std::cos(t);
    worst = std::max(worst, std::abs(arc.q(k, 0) - x));
    worst = std::max(worst, std::abs(arc.q(k, 1) - y));
  }
  return worst;
}

}  // namespace

TEST_CASE("admissible integration tracks the analytic solution") {
  ControlSystem sys = unicycle();
  CHECK(steering_endpoint_error(sys, 400) < 1e-10);

  PiecewiseCurve curve = steering_curve(sys, -1.0, 1.0, 400);
  CHECK(curve.arc_count() == 1);
  CHECK(curve.arc(0).steps() % 2 == 0);
  CHECK(admissibility_residual(sys, curve) < 1e-8);
}

TEST_CASE("step refinement improves integration by the expected order") {
  ControlSystem sys = unicycle();
  const double coarse = steering_endpoint_error(sys, 10);
  const double fine = steering_endpoint_error(sys, 20);
  CHECK(coarse / fine >= 8.0);
}

TEST_CASE("curves with corners stay continuous in q while z jumps") {
  ControlSystem sys = unicycle();
  const double half_pi = 2.0 * std::atan(1.0);
  VectorXd q0(2);
  q0 << 0.0, -1.0;
  ZProvider law = [&](int arc, double) {
    return VectorXd::Constant(1, arc == 0 ? half_pi : 0.0);
  };
  PiecewiseCurve curve = integrate_admissible(sys, q0, -1.0, 1.0, {0.0}, law, 400);
  REQUIRE(curve.arc_count() == 2);
  CHECK(curve.corner_times() == std::vector<double>{0.0});

  // Arc 1 climbs the y axis, arc 2 runs along the x axis.
  const Arc& first = curve.arc(0);
  const Arc& second = curve.arc(1);
  CHECK(std::abs(first.q(first.steps(), 0)) < 1e-12);
  CHECK(std::abs(first.q(first.steps(), 1)) < 1e-12);
  CHECK(std::abs(second.q(second.steps(), 0) - 1.0) < 1e-12);
  CHECK(std::abs(second.q(second.steps(), 1)) < 1e-12);

  auto jumps = corner_jumps(sys, curve);
  REQUIRE(jumps.size() == 1);
  CHECK(jumps[0][0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(jumps[0][1] == doctest::Approx(-1.0).epsilon(1e-14));

  CHECK(admissibility_residual(sys, curve) < 1e-8);
  CHECK_NOTHROW(check_rank_along(sys, curve));
}

TEST_CASE("integration validates window and corner times") {
  ControlSystem sys = unicycle();
  VectorXd q0 = VectorXd::Zero(2);
  ZProvider law = [](int, double) { return VectorXd::Zero(1); };
  CHECK_THROWS_AS(integrate_admissible(sys, q0, 1.0, 1.0, {}, law), InvalidInputError);
  CHECK_THROWS_AS(integrate_admissible(sys, q0, 0.0, 1.0, {1.5}, law), InvalidInputError);
  CHECK_THROWS_AS(integrate_admissible(sys, q0, 0.0, 1.0, {0.6, 0.4}, law),
                  InvalidInputError);
  CHECK_THROWS_AS(integrate_admissible(sys, q0, 0.0, 1.0, {}, law, 0), InvalidInputError);
}

TEST_CASE("grid derivative stencils are fourth order") {
  const int m = 20;
  const double h = 0.05;
  MatrixXd quartic(m + 1, 1), sine(m + 1, 1);
  for (int k = 0; k <= m; ++k) {
    const double t = k * h;
    quartic(k, 0) = std::pow(t, 4) - 2 * std::pow(t, 2) + t;
    sine(k, 0) = std::sin(3 * t);
  }
  MatrixXd dq = grid_time_derivative(quartic, h);
  for (int k = 0; k <= m; ++k) {
    const double t = k * h;
    const double exact = 4 * std::pow(t, 3) - 4 * t + 1;
    CHECK(dq(k, 0) == doctest::Approx(exact).epsilon(1e-11));
  }
  MatrixXd ds = grid_time_derivative(sine, h);
  for (int k = 0; k <= m; ++k) {
    const double t = k * h;
    CHECK(std::abs(ds(k, 0) - 3 * std::cos(3 * t)) < 5e-4);
  }
}

TEST_CASE("Simpson quadrature and its cumulative form agree with calculus") {
  const int m = 40;
  const double h = 1.0 / m;
  Eigen::VectorXd cubic(m + 1), wave(m + 1);
  MatrixXd wave_mat(m + 1, 2);
  for (int k = 0; k <= m; ++k) {
    const double t = k * h;
    cubic[k] = t * t * t - t;
    wave[k] = std::cos(3 * t);
    wave_mat(k, 0) = wave[k];
    wave_mat(k, 1) = std::exp(t);
  }
  CHECK(simpson_integral(cubic, h) == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK(simpson_integral(wave, h)
        == doctest::Approx(std::sin(3.0) / 3.0).epsilon(1e-8));

  MatrixXd cumulative = cumulative_integral(wave_mat, h);
  for (int k = 0; k <= m; ++k) {
    const double t = k * h;
    CHECK(std::abs(cumulative(k, 0) - std::sin(3 * t) / 3.0) < 1e-5);
    CHECK(std::abs(cumulative(k, 1) - (std::exp(t) - 1.0)) < 1e-6);
  }
  CHECK(cumulative(m, 0) == doctest::Approx(simpson_integral(wave, h)).epsilon(1e-13));

  Eigen::VectorXd odd_count(4);
  odd_count << 0, 1, 2, 3;
  CHECK_THROWS_AS(simpson_integral(odd_count, h), InvalidInputError);
}

TEST_CASE("curve sampler interpolates states and controls") {
  ControlSystem sys = unicycle();
  PiecewiseCurve curve = steering_curve(sys, -1.0, 1.0, 400);
  CurveSampler sampler(sys, curve);
  const double t0 = -1.0;
  for (double t : {-0.987, -0.5001, 0.0, 0.33337, 0.9999}) {
    VectorXd q = sampler.q_at(0, t);
    CHECK(std::abs(q[0] - (std::sin(t) - std::sin(t0))) < 1e-9);
    CHECK(std::abs(q[1] - (std::cos(t0) - std::cos(t))) < 1e-9);
    VectorXd z = sampler.z_at(0, t);
    CHECK(std::abs(z[0] - t) < 1e-9);
  }
  // Node values reproduce to roundoff.
  const Arc& arc = curve.arc(0);
  VectorXd qn = sampler.q_at(0, arc.time_at(7));
  CHECK(std::abs(qn[0] - arc.q(7, 0)) < 1e-14);
  CHECK(std::abs(qn[1] - arc.q(7, 1)) < 1e-14);
  // Mild extrapolation beyond the arc stays sane.
  VectorXd qx = sampler.q_at(0, 1.0 + 1e-3);
  CHECK(std::abs(qx[0] - (std::sin(1.0 + 1e-3) - std::sin(t0))) < 1e-7);
}

TEST_CASE("restriction keeps interior corners and stays admissible") {
  ControlSystem sys = unicycle();
  const double half_pi = 2.0 * std::atan(1.0);
  VectorXd q0(2);
  q0 << 0.0, -1.0;
  ZProvider law = [&](int arc, double) {
    return VectorXd::Constant(1, arc == 0 ? half_pi : 0.0);
  };
  PiecewiseCurve curve = integrate_admissible(sys, q0, -1.0, 1.0, {0.0}, law, 400);

  PiecewiseCurve inner = restrict_curve(sys, curve, -0.5, 0.5);
  REQUIRE(inner.arc_count() == 2);
  CHECK(inner.t_start() == -0.5);
  CHECK(inner.t_end() == 0.5);
  CHECK(inner.corner_times() == std::vector<double>{0.0});
  CHECK(admissibility_residual(sys, inner) < 1e-6);

  PiecewiseCurve left = restrict_curve(sys, curve, -1.0, 0.0);
  CHECK(left.arc_count() == 1);

  CHECK_THROWS_AS(restrict_curve(sys, curve, -2.0, 0.5), InvalidInputError);
  CHECK_THROWS_AS(restrict_curve(sys, curve, 0.5, 0.5), InvalidInputError);
}

TEST_CASE("csv output round-trips byte for byte") {
  ControlSystem sys = unicycle();
  const double half_pi = 2.0 * std::atan(1.0);
  VectorXd q0(2);
  q0 << 0.0, -1.0;
  ZProvider law = [&](int arc, double) {
    return VectorXd::Constant(1, arc == 0 ? half_pi : 0.0);
  };
  PiecewiseCurve curve = integrate_admissible(sys, q0, -1.0, 1.0, {0.0}, law, 50);

  std::ostringstream first;
  write_curve_csv(first, curve);
  std::istringstream back(first.str());
  CurveCsvData data = read_curve_csv(back);
  CHECK_FALSE(data.has_momenta);
  std::ostringstream second;
  write_curve_csv(second, data.curve);
  CHECK(first.str() == second.str());

  std::istringstream head_only(first.str());
  std::string header;
  std::getline(head_only, header);
  CHECK(header == "t,arc,q1,q2,z1");
}

TEST_CASE("csv with momenta round-trips and validates") {
  ControlSystem sys = unicycle();
  PiecewiseCurve curve = steering_curve(sys, 0.0, 1.0, 25);
  const int m = curve.arc(0).steps();
  std::vector<Eigen::VectorXd> p0 = {Eigen::VectorXd::LinSpaced(m + 1, 0.0, 1.0)};
  std::vector<MatrixXd> p = {MatrixXd::Random(m + 1, 2)};

  std::ostringstream first;
  write_curve_csv(first, curve, p0, p);
  std::istringstream back(first.str());
  CurveCsvData data = read_curve_csv(back);
  REQUIRE(data.has_momenta);
  CHECK(data.p0[0].size() == m + 1);
  CHECK(data.p[0].rows() == m + 1);
  std::ostringstream second;
  write_curve_csv(second, data.curve, data.p0, data.p);
  CHECK(first.str() == second.str());
}

TEST_CASE("csv parsing rejects malformed input") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_curve_csv(in);
  };
  CHECK_THROWS_AS(parse(""), InvalidInputError);
  CHECK_THROWS_AS(parse("a,b,c\n"), InvalidInputError);
  CHECK_THROWS_AS(parse("t,arc,q1,z1\n0,0,1\n"), InvalidInputError);
  CHECK_THROWS_AS(parse("t,arc,q1,z1\n0,0,1,bad\n"), InvalidInputError);
  // Non-uniform grid.
  CHECK_THROWS_AS(parse("t,arc,q1,z1\n"
                        "0,0,0,0\n0.1,0,0,0\n0.35,0,0,0\n0.3,0,0,0\n0.4,0,0,0\n"),
                  InvalidInputError);
  // Arc indices with a gap.
  CHECK_THROWS_AS(parse("t,arc,q1,z1\n"
                        "0,0,0,0\n0.25,0,0,0\n0.5,0,0,0\n0.75,0,0,0\n1,0,0,0\n"
                        "1,2,0,0\n1.25,2,0,0\n1.5,2,0,0\n1.75,2,0,0\n2,2,0,0\n"),
                  InvalidInputError);
}

TEST_CASE("piecewise curve construction validates arcs") {
  auto make_arc = [](double t0, double t1, int m) {
    Arc arc;
    arc.t_start = t0;
    arc.t_end = t1;
    arc.q = MatrixXd::Zero(m + 1, 1);
    arc.z = MatrixXd::Zero(m + 1, 1);
    return arc;
  };

  CHECK_THROWS_AS(PiecewiseCurve({}, 1, 1), InvalidInputError);
  CHECK_THROWS_AS(PiecewiseCurve({make_arc(0, 1, 3)}, 1, 1), InvalidInputError);
  CHECK_THROWS_AS(PiecewiseCurve({make_arc(0, 1, 5)}, 1, 1), InvalidInputError);
  CHECK_THROWS_AS(PiecewiseCurve({make_arc(0, 0, 4)}, 1, 1), InvalidInputError);
  CHECK_NOTHROW(PiecewiseCurve({make_arc(0, 1, 4)}, 1, 1));

  // Mismatched boundary time.
  CHECK_THROWS_AS(PiecewiseCurve({make_arc(0, 1, 4), make_arc(1.0000001, 2, 4)}, 1, 1),
                  InvalidInputError);

  // State jump across the corner.
  Arc second = make_arc(1, 2, 4);
  second.q.row(0).setConstant(0.5);
  CHECK_THROWS_AS(PiecewiseCurve({make_arc(0, 1, 4), second}, 1, 1), InvalidInputError);
}
