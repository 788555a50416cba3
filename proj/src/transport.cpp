#include "varcalc/transport.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace varcalc {

Eigen::MatrixXd InfinitesimalControl::value(int arc_index, double t,
                                            int control_dim, int state_dim) const {
  if (!fn_) return Eigen::MatrixXd::Zero(control_dim, state_dim);
  Eigen::MatrixXd h = fn_(arc_index, t);
  if (h.rows() != control_dim || h.cols() != state_dim) {
    throw InvalidInputError("infinitesimal control must be " +
                            std::to_string(control_dim) + "x" +
                            std::to_string(state_dim) + ", got " +
                            std::to_string(h.rows()) + "x" +
                            std::to_string(h.cols()));
  }
  return h;
}

Eigen::MatrixXd transport_matrix(const ControlSystem::JacobianBundle& jac,
                                 const Eigen::MatrixXd& h) {
  return jac.dpsi_dq + jac.dpsi_dz * h;
}

Eigen::MatrixXd connection_matrix(const ControlSystem::JacobianBundle& jac,
                                  const Eigen::MatrixXd& h) {
  return -transport_matrix(jac, h).transpose();
}

namespace {

Eigen::MatrixXd rk4_matrix_step(const MatrixOdeRhs& f, double t,
                                const Eigen::MatrixXd& y, double h) {
  const Eigen::MatrixXd k1 = f(t, y);
  const Eigen::MatrixXd k2 = f(t + h / 2, y + (h / 2) * k1);
  const Eigen::MatrixXd k3 = f(t + h / 2, y + (h / 2) * k2);
  const Eigen::MatrixXd k4 = f(t + h, y + h * k3);
  return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace

Eigen::MatrixXd matrix_ode_step(const MatrixOdeRhs& rhs, double t,
                                const Eigen::MatrixXd& y, double h) {
  const Eigen::MatrixXd full = rk4_matrix_step(rhs, t, y, h);
  const Eigen::MatrixXd mid = rk4_matrix_step(rhs, t, y, h / 2);
  const Eigen::MatrixXd half = rk4_matrix_step(rhs, t + h / 2, mid, h / 2);
  return half + (half - full) / 15.0;
}

TransportedFrame transport_frame(const ControlSystem& sys, const PiecewiseCurve& curve,
                                 const InfinitesimalControl& h, double condition_limit) {
  const int n = sys.state_dim();
  const int r = sys.control_dim();
  CurveSampler sampler(sys, curve);

  TransportedFrame out;
  Eigen::MatrixXd current = Eigen::MatrixXd::Identity(n, n);

  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    MatrixOdeRhs rhs = [&](double t, const Eigen::MatrixXd& f) -> Eigen::MatrixXd {
      const auto jac = sys.jacobians(t, sampler.q_at(s, t), sampler.z_at(s, t));
      return transport_matrix(jac, h.value(s, t, r, n)) * f;
    };

    std::vector<Eigen::MatrixXd> frames;
    std::vector<Eigen::MatrixXd> coframes;
    frames.reserve(static_cast<std::size_t>(arc.steps() + 1));
    coframes.reserve(static_cast<std::size_t>(arc.steps() + 1));

    for (int k = 0; k <= arc.steps(); ++k) {
      if (k > 0) {
        const double tk = arc.time_at(k - 1);
        current = matrix_ode_step(rhs, tk, current, arc.time_at(k) - tk);
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(current);
      const double smax = svd.singularValues()[0];
      const double smin = svd.singularValues()[n - 1];
      const double cond = smin > 0.0 ? smax / smin
                                     : std::numeric_limits<double>::infinity();
      if (!(cond < condition_limit)) {
        throw SingularFrameError("transported frame condition " +
                                 format_double(cond) + " exceeds " +
                                 format_double(condition_limit) + " at t=" +
                                 format_double(arc.time_at(k)));
      }
      out.max_condition = std::max(out.max_condition, cond);
      Eigen::MatrixXd inverse = current.inverse();
      const double defect =
          (inverse * current - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
      out.max_duality_defect = std::max(out.max_duality_defect, defect);
      frames.push_back(current);
      coframes.push_back(std::move(inverse));
    }
    out.frame.push_back(std::move(frames));
    out.coframe.push_back(std::move(coframes));
    // Crossing a corner keeps the frame components; `current` carries over.
  }
  return out;
}

namespace {

std::vector<Eigen::MatrixXd> absolute_derivative_impl(
    const ControlSystem& sys, const PiecewiseCurve& curve,
    const InfinitesimalControl& h, const std::vector<Eigen::MatrixXd>& fields,
    bool covector) {
  const int n = sys.state_dim();
  const int r = sys.control_dim();
  if (static_cast<int>(fields.size()) != curve.arc_count()) {
    throw InvalidInputError("field data does not match the arc count");
  }
  std::vector<Eigen::MatrixXd> out;
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    const Eigen::MatrixXd& field = fields[static_cast<std::size_t>(s)];
    if (field.rows() != arc.q.rows() || field.cols() != n) {
      throw InvalidInputError("field on arc " + std::to_string(s) +
                              " must be (M+1) x n");
    }
    Eigen::MatrixXd result = grid_time_derivative(field, arc.step());
    for (int k = 0; k <= arc.steps(); ++k) {
      const double tk = arc.time_at(k);
      const auto jac = sys.jacobians(tk, arc.q.row(k).transpose(), arc.z.row(k).transpose());
      const Eigen::MatrixXd a = transport_matrix(jac, h.value(s, tk, r, n));
      if (covector) {
        result.row(k) += (a.transpose() * field.row(k).transpose()).transpose();
      } else {
        result.row(k) -= (a * field.row(k).transpose()).transpose();
      }
    }
    out.push_back(std::move(result));
  }
  return out;
}

}  // namespace

std::vector<Eigen::MatrixXd> absolute_derivative_vector(
    const ControlSystem& sys, const PiecewiseCurve& curve,
    const InfinitesimalControl& h, const std::vector<Eigen::MatrixXd>& fields) {
  return absolute_derivative_impl(sys, curve, h, fields, false);
}

std::vector<Eigen::MatrixXd> absolute_derivative_covector(
    const ControlSystem& sys, const PiecewiseCurve& curve,
    const InfinitesimalControl& h, const std::vector<Eigen::MatrixXd>& fields) {
  return absolute_derivative_impl(sys, curve, h, fields, true);
}

VariationResult variational_integrate(const ControlSystem& sys,
                                      const PiecewiseCurve& curve,
                                      const TransportedFrame& frame,
                                      const DeformationDatum& datum) {
  const int n = sys.state_dim();
  const int r = sys.control_dim();
  const int arcs = curve.arc_count();
  if (static_cast<int>(frame.frame.size()) != arcs) {
    throw InvalidInputError("frame does not match the curve");
  }
  if (static_cast<int>(datum.alphas.size()) != arcs - 1) {
    throw InvalidInputError("deformation needs one corner shift per interior corner");
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (datum.x0.size() != 0) {
    if (datum.x0.size() != n) {
      throw InvalidInputError("initial variation has the wrong dimension");
    }
    x = datum.x0;
  }

  const std::vector<Eigen::VectorXd> jumps = corner_jumps(sys, curve);

  VariationResult out;
  for (int s = 0; s < arcs; ++s) {
    const Arc& arc = curve.arc(s);
    const int m = arc.steps();
    const auto& coframes = frame.coframe[static_cast<std::size_t>(s)];
    const auto& frames = frame.frame[static_cast<std::size_t>(s)];

    Eigen::MatrixXd rhs(m + 1, n);
    for (int k = 0; k <= m; ++k) {
      const double tk = arc.time_at(k);
      Eigen::VectorXd u = datum.u ? datum.u(s, tk) : Eigen::VectorXd::Zero(r);
      if (u.size() != r) {
        throw InvalidInputError("control correction has the wrong dimension");
      }
      const Eigen::MatrixXd b = sys.psi_control_jacobian(
          tk, arc.q.row(k).transpose(), arc.z.row(k).transpose());
      rhs.row(k) = (coframes[static_cast<std::size_t>(k)] * (b * u)).transpose();
    }

    Eigen::MatrixXd components = cumulative_integral(rhs, arc.step());
    components.rowwise() += x.transpose();

    Eigen::MatrixXd coords(m + 1, n);
    for (int k = 0; k <= m; ++k) {
      coords.row(k) =
          (frames[static_cast<std::size_t>(k)] * components.row(k).transpose()).transpose();
    }

    x = components.row(m).transpose();
    if (s + 1 < arcs) {
      const Eigen::MatrixXd& e = coframes[static_cast<std::size_t>(m)];
      x -= datum.alphas[static_cast<std::size_t>(s)] *
           (e * jumps[static_cast<std::size_t>(s)]);
    }
    out.frame_components.push_back(std::move(components));
    out.coordinate_components.push_back(std::move(coords));
  }
  out.endpoint = out.coordinate_components.back()
                     .row(curve.arc(arcs - 1).steps())
                     .transpose();
  return out;
}

}  // namespace varcalc
