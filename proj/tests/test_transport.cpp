#include <cmath>

#include "doctest.h"
#include "varcalc/transport.hpp"

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

// Rotation system: dq1/dt = q2 + z1, dq2/dt = -q1. Its transport matrix at
// zero gauge is the constant rotation generator, so the frame is the
// rotation by t and closed forms exist for everything below.
ControlSystem rotator() {
  SystemSpec spec;
  spec.state_names = {"q1", "q2"};
  spec.control_names = {"z1"};
  spec.psi = {"q2 + z1", "-q1"};
  return ControlSystem(spec);
}

PiecewiseCurve two_arc_unicycle(const ControlSystem& sys, int density = 200) {
  const double half_pi = 2.0 * std::atan(1.0);
  VectorXd q0(2);
  q0 << 0.0, -1.0;
  ZProvider law = [half_pi](int arc, double) {
    return VectorXd::Constant(1, arc == 0 ? half_pi : 0.0);
  };
  return integrate_admissible(sys, q0, -1.0, 1.0, {0.0}, law, density);
}

}  // namespace

TEST_CASE("transport and connection matrices follow the kinetic jacobians") {
  ControlSystem sys = unicycle();
  const double z = 0.7;
  auto jac = sys.jacobians(0.0, VectorXd::Zero(2), VectorXd::Constant(1, z));
  MatrixXd h(1, 2);
  h << 0.3, -0.4;
  MatrixXd a = transport_matrix(jac, h);
  CHECK(a(0, 0) == doctest::Approx(-std::sin(z) * 0.3).epsilon(1e-14));
  CHECK(a(0, 1) == doctest::Approx(-std::sin(z) * -0.4).epsilon(1e-14));
  CHECK(a(1, 0) == doctest::Approx(std::cos(z) * 0.3).epsilon(1e-14));
  CHECK(a(1, 1) == doctest::Approx(std::cos(z) * -0.4).epsilon(1e-14));
  MatrixXd tau = connection_matrix(jac, h);
  CHECK((tau + a.transpose()).norm() == 0.0);
}

TEST_CASE("frame transport matches the closed-form rotation") {
  ControlSystem sys = rotator();
  PiecewiseCurve curve = integrate_admissible(
      sys, VectorXd::Zero(2), 0.0, 1.0, {},
      [](int, double) { return VectorXd::Zero(1); }, 200);
  TransportedFrame frame = transport_frame(sys, curve);
  CHECK(frame.max_duality_defect < 1e-12);

  const Arc& arc = curve.arc(0);
  for (int k : {0, 50, 111, arc.steps()}) {
    const double t = arc.time_at(k);
    MatrixXd expected(2, 2);
    expected << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    CHECK((frame.frame[0][static_cast<std::size_t>(k)] - expected).cwiseAbs().maxCoeff()
          < 1e-10);
  }
}

TEST_CASE("frames stay dual and glue bitwise across corners") {
  ControlSystem sys = unicycle();
  PiecewiseCurve curve = two_arc_unicycle(sys);

  MatrixXd hmat(1, 2);
  hmat << 0.2, -0.1;
  InfinitesimalControl gauge([hmat](int, double) { return hmat; });

  for (const InfinitesimalControl& h :
       {InfinitesimalControl(), gauge}) {
    TransportedFrame frame = transport_frame(sys, curve, h);
    CHECK(frame.max_duality_defect <= 1e-9);
    CHECK(frame.max_condition < 1e3);
    const auto& last_of_first = frame.frame[0].back();
    const auto& first_of_second = frame.frame[1].front();
    CHECK((last_of_first - first_of_second).norm() == 0.0);
  }
}

TEST_CASE("transported fields have vanishing absolute derivative") {
  ControlSystem sys = unicycle();
  PiecewiseCurve curve = two_arc_unicycle(sys, 400);
  MatrixXd hmat(1, 2);
  hmat << 0.15, 0.25;
  InfinitesimalControl h([hmat](int, double) { return hmat; });
  TransportedFrame frame = transport_frame(sys, curve, h);

  for (int column = 0; column < 2; ++column) {
    std::vector<MatrixXd> field;
    for (int s = 0; s < curve.arc_count(); ++s) {
      const int m = curve.arc(s).steps();
      MatrixXd rows(m + 1, 2);
      for (int k = 0; k <= m; ++k) {
        rows.row(k) =
            frame.frame[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)]
                .col(column)
                .transpose();
      }
      field.push_back(std::move(rows));
    }
    auto derivative = absolute_derivative_vector(sys, curve, h, field);
    for (const MatrixXd& rows : derivative) {
      CHECK(rows.cwiseAbs().maxCoeff() < 1e-6);
    }
  }

  // Dual forms are carried by the covector law.
  for (int row = 0; row < 2; ++row) {
    std::vector<MatrixXd> field;
    for (int s = 0; s < curve.arc_count(); ++s) {
      const int m = curve.arc(s).steps();
      MatrixXd rows(m + 1, 2);
      for (int k = 0; k <= m; ++k) {
        rows.row(k) =
            frame.coframe[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)].row(row);
      }
      field.push_back(std::move(rows));
    }
    auto derivative = absolute_derivative_covector(sys, curve, h, field);
    for (const MatrixXd& rows : derivative) {
      CHECK(rows.cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("variation of the rotation system matches its closed form") {
  ControlSystem sys = rotator();
  PiecewiseCurve curve = integrate_admissible(
      sys, VectorXd::Zero(2), 0.0, 1.0, {},
      [](int, double) { return VectorXd::Zero(1); }, 200);
  TransportedFrame frame = transport_frame(sys, curve);

  const double u0 = 0.8;
  DeformationDatum datum;
  datum.u = [u0](int, double) { return VectorXd::Constant(1, u0); };

  VariationResult result = variational_integrate(sys, curve, frame, datum);
  const Arc& arc = curve.arc(0);
  for (int k : {0, 77, arc.steps()}) {
    const double t = arc.time_at(k);
    // X(t) = R(t) * integral_0^t R(-tau) B u dtau with B = (1,0).
    const double ix = std::sin(t) * u0;
    const double iy = (1.0 - std::cos(t)) * u0;
    const double xx = std::cos(t) * ix + std::sin(t) * iy;
    const double xy = -std::sin(t) * ix + std::cos(t) * iy;
    CHECK(std::abs(result.coordinate_components[0](k, 0) - xx) < 1e-8);
    CHECK(std::abs(result.coordinate_components[0](k, 1) - xy) < 1e-8);
  }
  CHECK(result.endpoint.size() == 2);
}

TEST_CASE("variations satisfy the raw linearised equation and corner jumps") {
  ControlSystem sys = unicycle();
  PiecewiseCurve curve = two_arc_unicycle(sys, 400);
  MatrixXd hmat(1, 2);
  hmat << -0.2, 0.35;
  InfinitesimalControl h([hmat](int, double) { return hmat; });
  TransportedFrame frame = transport_frame(sys, curve, h);

  DeformationDatum datum;
  datum.u = [](int arc, double t) {
    return VectorXd::Constant(1, arc == 0 ? std::sin(2 * t) : 0.5 * t * t - 0.1);
  };
  datum.alphas = {0.7};
  VectorXd x0(2);
  x0 << 0.1, -0.3;
  datum.x0 = x0;

  VariationResult result = variational_integrate(sys, curve, frame, datum);
  CHECK(result.coordinate_components[0].row(0).transpose().isApprox(x0, 1e-14));

  // dX/dt = (dpsi/dq) X + (dpsi/dz) X^A with the lift X^A = h X + U.
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    const MatrixXd& x = result.coordinate_components[static_cast<std::size_t>(s)];
    MatrixXd dx = grid_time_derivative(x, arc.step());
    for (int k = 0; k <= arc.steps(); ++k) {
      const double tk = arc.time_at(k);
      auto jac = sys.jacobians(tk, arc.q.row(k).transpose(), arc.z.row(k).transpose());
      VectorXd lift = hmat * x.row(k).transpose() + datum.u(s, tk);
      VectorXd rhs = jac.dpsi_dq * x.row(k).transpose() + jac.dpsi_dz * lift;
      CHECK((dx.row(k).transpose() - rhs).cwiseAbs().maxCoeff() < 1e-6);
    }
  }

  // Coordinate jump at the corner is -alpha times the kinetic jump.
  auto jumps = corner_jumps(sys, curve);
  VectorXd pre = result.coordinate_components[0].row(curve.arc(0).steps()).transpose();
  VectorXd post = result.coordinate_components[1].row(0).transpose();
  CHECK((post - pre + datum.alphas[0] * jumps[0]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("the coordinate variation is gauge independent") {
  ControlSystem sys = unicycle();
  PiecewiseCurve curve = two_arc_unicycle(sys, 400);

  DeformationDatum base;
  base.u = [](int arc, double t) {
    return VectorXd::Constant(1, arc == 0 ? std::cos(t) : t - 0.2);
  };
  base.alphas = {0.4};

  TransportedFrame zero_frame = transport_frame(sys, curve);
  VariationResult reference = variational_integrate(sys, curve, zero_frame, base);

  // In a nonzero gauge the same coordinate field comes from the corrected
  // control U' = U - h X, with X read off the zero-gauge run.
  MatrixXd hmat(1, 2);
  hmat << 0.3, -0.5;
  InfinitesimalControl h([hmat](int, double) { return hmat; });
  TransportedFrame gauged_frame = transport_frame(sys, curve, h);

  auto x_lookup = [&](int s, double t) {
    const Arc& arc = curve.arc(s);
    const int k = static_cast<int>(std::lround((t - arc.t_start) / arc.step()));
    return reference.coordinate_components[static_cast<std::size_t>(s)]
        .row(k)
        .transpose();
  };
  DeformationDatum gauged = base;
  gauged.u = [&](int s, double t) {
    return (base.u(s, t) - hmat * x_lookup(s, t)).eval();
  };

  VariationResult result = variational_integrate(sys, curve, gauged_frame, gauged);
  for (int s = 0; s < curve.arc_count(); ++s) {
    const MatrixXd diff =
        result.coordinate_components[static_cast<std::size_t>(s)] -
        reference.coordinate_components[static_cast<std::size_t>(s)];
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("degenerate frames raise SingularFrameError") {
  SystemSpec spec;
  spec.state_names = {"q1", "q2"};
  spec.control_names = {"z1"};
  spec.psi = {"5*q1 + z1", "-5*q2 + z1"};
  ControlSystem sys(spec);
  PiecewiseCurve curve = integrate_admissible(
      sys, VectorXd::Zero(2), 0.0, 3.0, {},
      [](int, double) { return VectorXd::Zero(1); }, 100);
  CHECK_THROWS_AS(transport_frame(sys, curve), SingularFrameError);
  CHECK_NOTHROW(transport_frame(sys, curve, InfinitesimalControl(), 1e14));
}

TEST_CASE("deformation data is validated") {
  ControlSystem sys = unicycle();
  PiecewiseCurve curve = two_arc_unicycle(sys, 100);
  TransportedFrame frame = transport_frame(sys, curve);

  DeformationDatum missing_alpha;
  missing_alpha.u = [](int, double) { return VectorXd::Zero(1); };
  CHECK_THROWS_AS(variational_integrate(sys, curve, frame, missing_alpha),
                  InvalidInputError);

  DeformationDatum bad_x0;
  bad_x0.alphas = {0.0};
  bad_x0.x0 = VectorXd::Zero(3);
  CHECK_THROWS_AS(variational_integrate(sys, curve, frame, bad_x0), InvalidInputError);

  InfinitesimalControl bad_h([](int, double) { return MatrixXd::Zero(2, 2); });
  CHECK_THROWS_AS(transport_frame(sys, curve, bad_h), InvalidInputError);
}
