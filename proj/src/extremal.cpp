#include "varcalc/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "varcalc/transport.hpp"

namespace varcalc {

namespace {

int even_step_count(double duration, int grid_density) {
  const double want = duration * grid_density;
  int m = static_cast<int>(std::ceil(want - 1e-12));
  if (m < 4) m = 4;
  if (m % 2 != 0) ++m;
  return m;
}

void check_momenta_shape(const PiecewiseCurve& curve, const CovectorPath& momenta) {
  const std::size_t arcs = static_cast<std::size_t>(curve.arc_count());
  if (momenta.p.size() != arcs || momenta.p0.size() != arcs) {
    throw InvalidInputError("momentum path has " + std::to_string(momenta.p.size()) +
                            " arcs, curve has " + std::to_string(arcs));
  }
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    const Eigen::MatrixXd& p = momenta.p[static_cast<std::size_t>(s)];
    const Eigen::VectorXd& p0 = momenta.p0[static_cast<std::size_t>(s)];
    if (p.rows() != arc.steps() + 1 || p.cols() != curve.state_dim() ||
        p0.size() != arc.steps() + 1) {
      throw InvalidInputError("momentum samples of arc " + std::to_string(s) +
                              " do not match its grid");
    }
  }
}

}  // namespace

double ResidualReport::max_residual() const {
  return std::max({ode_q, ode_p, stationarity, corner_p, corner_h});
}

HamiltonianData hamiltonian(const ControlSystem& sys, double t,
                            const Eigen::VectorXd& q, const Eigen::VectorXd& z,
                            const Eigen::VectorXd& p) {
  const auto jac = sys.jacobians(t, q, z);
  HamiltonianData data;
  data.value = p.dot(jac.psi) - jac.lag;
  data.dh_dq = jac.dpsi_dq.transpose() * p - jac.dlag_dq;
  data.dh_dp = jac.psi;
  data.dh_dz = jac.dpsi_dz.transpose() * p - jac.dlag_dz;
  return data;
}

ReducedHamiltonian::ReducedHamiltonian(const ControlSystem& sys,
                                       double newton_tolerance,
                                       double regularity_tolerance,
                                       int max_iterations)
    : sys_(sys),
      newton_tol_(newton_tolerance),
      reg_tol_(regularity_tolerance),
      max_iter_(max_iterations),
      warm_(Eigen::VectorXd::Zero(sys.control_dim())) {}

void ReducedHamiltonian::set_seed(const Eigen::VectorXd& z_seed) {
  if (z_seed.size() != sys_.control_dim()) {
    throw InvalidInputError("control seed has size " + std::to_string(z_seed.size()) +
                            ", expected " + std::to_string(sys_.control_dim()));
  }
  warm_ = z_seed;
}

ReducedHamiltonian::Reduction ReducedHamiltonian::solve(
    double t, const Eigen::VectorXd& q, const Eigen::VectorXd& p,
    const Eigen::VectorXd& z_seed) {
  set_seed(z_seed);
  return solve_warm(t, q, p);
}

ReducedHamiltonian::Reduction ReducedHamiltonian::solve_warm(
    double t, const Eigen::VectorXd& q, const Eigen::VectorXd& p) {
  Eigen::VectorXd z = warm_;
  for (int iter = 0; iter < max_iter_; ++iter) {
    const auto jac = sys_.jacobians(t, q, z);
    const Eigen::VectorXd gradient = jac.dpsi_dz.transpose() * p - jac.dlag_dz;
    const Eigen::MatrixXd hess = sys_.pontryagin_hessian(t, q, z, p);
    const double det = hess.determinant();
    if (!std::isfinite(det) || std::abs(det) < reg_tol_) {
      throw RegularityFailureError(
          "control Hessian determinant " + format_double(det) + " below " +
          format_double(reg_tol_) + " at t=" + format_double(t));
    }
    if (gradient.cwiseAbs().maxCoeff() <= newton_tol_) {
      warm_ = z;
      Reduction reduction;
      reduction.z = z;
      reduction.value = p.dot(jac.psi) - jac.lag;
      reduction.hessian_det = det;
      return reduction;
    }
    z -= hess.lu().solve(gradient);
    if (!z.allFinite()) {
      throw NoConvergenceError("control stationarity iteration diverged at t=" +
                               format_double(t));
    }
  }
  throw NoConvergenceError("control stationarity not met after " +
                           std::to_string(max_iter_) + " iterations at t=" +
                           format_double(t));
}

ExtremalCandidate integrate_hamilton(const ControlSystem& sys,
                                     const Eigen::VectorXd& q0,
                                     const Eigen::VectorXd& p0, double t0,
                                     double t1, const Eigen::VectorXd& z_seed,
                                     int grid_density) {
  const int n = sys.state_dim();
  if (q0.size() != n || p0.size() != n) {
    throw InvalidInputError("state and momentum seeds must have size " +
                            std::to_string(n));
  }
  if (!(t1 - t0 > 1e-12)) {
    throw InvalidInputError("time span must be positive, got [" +
                            format_double(t0) + ", " + format_double(t1) + "]");
  }

  ReducedHamiltonian reduced(sys);
  reduced.set_seed(z_seed);
  MatrixOdeRhs rhs = [&](double t, const Eigen::MatrixXd& y) -> Eigen::MatrixXd {
    const Eigen::VectorXd q = y.topRows(n);
    const Eigen::VectorXd p = y.bottomRows(n);
    const auto reduction = reduced.solve_warm(t, q, p);
    const auto jac = sys.jacobians(t, q, reduction.z);
    Eigen::MatrixXd dy(2 * n, 1);
    dy.topRows(n) = jac.psi;
    dy.bottomRows(n) = jac.dlag_dq - jac.dpsi_dq.transpose() * p;
    return dy;
  };

  const int m = even_step_count(t1 - t0, grid_density);
  Arc arc;
  arc.t_start = t0;
  arc.t_end = t1;
  arc.q.resize(m + 1, n);
  arc.z.resize(m + 1, sys.control_dim());
  Eigen::MatrixXd p_samples(m + 1, n);

  Eigen::MatrixXd y(2 * n, 1);
  y.topRows(n) = q0;
  y.bottomRows(n) = p0;
  for (int k = 0; k <= m; ++k) {
    if (k > 0) {
      const double tk = arc.time_at(k - 1);
      y = matrix_ode_step(rhs, tk, y, arc.time_at(k) - tk);
    }
    arc.q.row(k) = y.topRows(n).transpose();
    p_samples.row(k) = y.bottomRows(n).transpose();
    const auto node = reduced.solve_warm(arc.time_at(k), y.topRows(n),
                                         y.bottomRows(n));
    arc.z.row(k) = node.z.transpose();
  }

  ExtremalCandidate candidate{PiecewiseCurve({arc}, n, sys.control_dim()),
                              CovectorPath{}, ResidualReport{}};
  candidate.momenta.p = {p_samples};
  candidate.momenta.p0 = companion_momentum(sys, candidate.curve, candidate.momenta.p);
  candidate.residuals = extremal_residuals(sys, candidate.curve, candidate.momenta);
  return candidate;
}

std::vector<Eigen::VectorXd> companion_momentum(
    const ControlSystem& sys, const PiecewiseCurve& curve,
    const std::vector<Eigen::MatrixXd>& p) {
  std::vector<Eigen::VectorXd> p0;
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    Eigen::VectorXd values(arc.steps() + 1);
    for (int k = 0; k <= arc.steps(); ++k) {
      const double t = arc.time_at(k);
      const Eigen::VectorXd q = arc.q.row(k).transpose();
      const Eigen::VectorXd z = arc.z.row(k).transpose();
      const Eigen::VectorXd pk = p[static_cast<std::size_t>(s)].row(k).transpose();
      const double lag = sys.has_lagrangian() ? sys.lagrangian_value(t, q, z) : 0.0;
      values[k] = lag - pk.dot(sys.psi_value(t, q, z));
    }
    p0.push_back(std::move(values));
  }
  return p0;
}

double action_value(const ControlSystem& sys, const PiecewiseCurve& curve) {
  if (!sys.has_lagrangian()) {
    throw InvalidInputError("action integral needs a Lagrangian");
  }
  double total = 0.0;
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    Eigen::VectorXd samples(arc.steps() + 1);
    for (int k = 0; k <= arc.steps(); ++k) {
      samples[k] = sys.lagrangian_value(arc.time_at(k), arc.q.row(k).transpose(),
                                        arc.z.row(k).transpose());
    }
    total += simpson_integral(samples, arc.step());
  }
  return total;
}

ResidualReport extremal_residuals(const ControlSystem& sys,
                                  const PiecewiseCurve& curve,
                                  const CovectorPath& momenta) {
  check_momenta_shape(curve, momenta);
  ResidualReport report;
  report.hamiltonian_regularity = std::numeric_limits<double>::infinity();

  double p0_carry = momenta.p0.front()[0];
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    const Eigen::MatrixXd& p = momenta.p[static_cast<std::size_t>(s)];
    const Eigen::VectorXd& p0 = momenta.p0[static_cast<std::size_t>(s)];
    const double h = arc.step();
    const Eigen::MatrixXd qdot = grid_time_derivative(arc.q, h);
    const Eigen::MatrixXd pdot = grid_time_derivative(p, h);

    Eigen::MatrixXd p0_rate(arc.steps() + 1, 1);
    for (int k = 0; k <= arc.steps(); ++k) {
      const double t = arc.time_at(k);
      const Eigen::VectorXd q = arc.q.row(k).transpose();
      const Eigen::VectorXd z = arc.z.row(k).transpose();
      const Eigen::VectorXd pk = p.row(k).transpose();
      const auto jac = sys.jacobians(t, q, z);

      report.ode_q = std::max(report.ode_q,
                              (qdot.row(k).transpose() - jac.psi).cwiseAbs().maxCoeff());
      const Eigen::VectorXd p_residual =
          pdot.row(k).transpose() + jac.dpsi_dq.transpose() * pk - jac.dlag_dq;
      report.ode_p = std::max(report.ode_p, p_residual.cwiseAbs().maxCoeff());
      const Eigen::VectorXd stat = jac.dpsi_dz.transpose() * pk - jac.dlag_dz;
      report.stationarity = std::max(report.stationarity, stat.cwiseAbs().maxCoeff());
      report.p0_defect = std::max(report.p0_defect,
                                  std::abs(p0[k] - (jac.lag - pk.dot(jac.psi))));
      p0_rate(k, 0) = jac.dlag_dt - pk.dot(jac.dpsi_dt);

      const double det = sys.pontryagin_hessian(t, q, z, pk).determinant();
      report.hamiltonian_regularity = std::min(report.hamiltonian_regularity,
                                               std::abs(det));
    }

    const Eigen::MatrixXd p0_integrated = cumulative_integral(p0_rate, h);
    for (int k = 0; k <= arc.steps(); ++k) {
      report.p0_evolution_defect =
          std::max(report.p0_evolution_defect,
                   std::abs(p0_carry + p0_integrated(k, 0) - p0[k]));
    }
    p0_carry += p0_integrated(arc.steps(), 0);

    if (s + 1 < curve.arc_count()) {
      const Arc& next = curve.arc(s + 1);
      const Eigen::MatrixXd& p_next = momenta.p[static_cast<std::size_t>(s + 1)];
      const double a = arc.t_end;
      report.corner_p = std::max(report.corner_p,
                                 (p_next.row(0) - p.row(arc.steps())).cwiseAbs().maxCoeff());
      const Eigen::VectorXd q_corner = arc.q.row(arc.steps()).transpose();
      const double h_pre = hamiltonian(sys, a, q_corner,
                                       arc.z.row(arc.steps()).transpose(),
                                       p.row(arc.steps()).transpose()).value;
      const double h_post = hamiltonian(sys, a, next.q.row(0).transpose(),
                                        next.z.row(0).transpose(),
                                        p_next.row(0).transpose()).value;
      report.corner_h = std::max(report.corner_h, std::abs(h_post - h_pre));
    }
  }
  return report;
}

namespace {

struct Trial {
  Eigen::VectorXd residual;
  std::vector<Arc> arcs;
  std::vector<Eigen::MatrixXd> p;
};

class ShootingProblem {
 public:
  ShootingProblem(const ControlSystem& sys, Eigen::VectorXd q_start,
                  Eigen::VectorXd q_end, double t0, double t1,
                  std::vector<Eigen::VectorXd> branches, int grid_density)
      : sys_(sys),
        q_start_(std::move(q_start)),
        q_end_(std::move(q_end)),
        t0_(t0),
        t1_(t1),
        branches_(std::move(branches)),
        density_(grid_density) {}

  int segments() const { return static_cast<int>(branches_.size()); }

  Trial evaluate(const Eigen::VectorXd& x) const {
    const int n = sys_.state_dim();
    const int segments_count = segments();
    const double margin = 1e-6 * (t1_ - t0_);

    std::vector<double> bounds = {t0_};
    for (int s = 0; s + 1 < segments_count; ++s) bounds.push_back(x[n + s]);
    bounds.push_back(t1_);
    for (int s = 0; s + 1 < static_cast<int>(bounds.size()); ++s) {
      if (!(bounds[s + 1] - bounds[s] > margin)) {
        throw InvalidInputError("corner times collapsed a segment");
      }
    }

    Trial trial;
    trial.residual.resize(n + segments_count - 1);
    Eigen::VectorXd q = q_start_;
    Eigen::VectorXd p = x.head(n);
    double h_pre = 0.0;

    for (int s = 0; s < segments_count; ++s) {
      ReducedHamiltonian reduced(sys_);
      reduced.set_seed(branches_[static_cast<std::size_t>(s)]);
      if (s > 0) {
        const auto start = reduced.solve_warm(bounds[s], q, p);
        trial.residual[n + s - 1] = start.value - h_pre;
      }

      MatrixOdeRhs rhs = [&](double t, const Eigen::MatrixXd& y) -> Eigen::MatrixXd {
        const Eigen::VectorXd qq = y.topRows(n);
        const Eigen::VectorXd pp = y.bottomRows(n);
        const auto reduction = reduced.solve_warm(t, qq, pp);
        const auto jac = sys_.jacobians(t, qq, reduction.z);
        Eigen::MatrixXd dy(2 * n, 1);
        dy.topRows(n) = jac.psi;
        dy.bottomRows(n) = jac.dlag_dq - jac.dpsi_dq.transpose() * pp;
        return dy;
      };

      const int m = even_step_count(bounds[s + 1] - bounds[s], density_);
      Arc arc;
      arc.t_start = bounds[s];
      arc.t_end = bounds[s + 1];
      arc.q.resize(m + 1, n);
      arc.z.resize(m + 1, sys_.control_dim());
      Eigen::MatrixXd p_samples(m + 1, n);

      Eigen::MatrixXd y(2 * n, 1);
      y.topRows(n) = q;
      y.bottomRows(n) = p;
      for (int k = 0; k <= m; ++k) {
        if (k > 0) {
          const double tk = arc.time_at(k - 1);
          y = matrix_ode_step(rhs, tk, y, arc.time_at(k) - tk);
        }
        arc.q.row(k) = y.topRows(n).transpose();
        p_samples.row(k) = y.bottomRows(n).transpose();
        const auto node = reduced.solve_warm(arc.time_at(k), y.topRows(n),
                                             y.bottomRows(n));
        arc.z.row(k) = node.z.transpose();
        if (k == m) h_pre = node.value;
      }
      q = y.topRows(n);
      p = y.bottomRows(n);
      trial.arcs.push_back(std::move(arc));
      trial.p.push_back(std::move(p_samples));
    }

    trial.residual.head(n) = q - q_end_;
    if (!trial.residual.allFinite()) {
      throw NonFiniteError("shooting residual is not finite");
    }
    return trial;
  }

 private:
  const ControlSystem& sys_;
  Eigen::VectorXd q_start_;
  Eigen::VectorXd q_end_;
  double t0_;
  double t1_;
  std::vector<Eigen::VectorXd> branches_;
  int density_;
};

}  // namespace

ShootingResult shoot_extremal(const ControlSystem& sys,
                              const Eigen::VectorXd& q_start,
                              const Eigen::VectorXd& q_end, double t0, double t1,
                              const ShootingSeeds& seeds,
                              const ShootingOptions& options) {
  const int n = sys.state_dim();
  const int segments_count = static_cast<int>(seeds.z_branches.size());
  if (q_start.size() != n || q_end.size() != n) {
    throw InvalidInputError("boundary states must have size " + std::to_string(n));
  }
  if (!(t1 > t0)) {
    throw InvalidInputError("time span must be positive");
  }
  if (segments_count < 1) {
    throw InvalidInputError("at least one control branch seed is required");
  }
  if (static_cast<int>(seeds.corner_times.size()) != segments_count - 1) {
    throw InvalidInputError("expected " + std::to_string(segments_count - 1) +
                            " corner time seeds, got " +
                            std::to_string(seeds.corner_times.size()));
  }
  if (seeds.p_start.size() != n) {
    throw InvalidInputError("initial momentum seed must have size " +
                            std::to_string(n));
  }
  for (const Eigen::VectorXd& branch : seeds.z_branches) {
    if (branch.size() != sys.control_dim()) {
      throw InvalidInputError("control branch seeds must have size " +
                              std::to_string(sys.control_dim()));
    }
  }

  ShootingProblem problem(sys, q_start, q_end, t0, t1, seeds.z_branches,
                          options.grid_density);

  const int unknowns = n + segments_count - 1;
  Eigen::VectorXd x(unknowns);
  x.head(n) = seeds.p_start;
  for (int s = 0; s + 1 < segments_count; ++s) x[n + s] = seeds.corner_times[static_cast<std::size_t>(s)];

  Trial current = problem.evaluate(x);
  Trial best = current;
  int iterations = 0;
  if (options.on_iterate) {
    options.on_iterate(0, current.residual.cwiseAbs().maxCoeff());
  }

  for (; iterations < options.max_iterations; ++iterations) {
    if (current.residual.cwiseAbs().maxCoeff() <= options.residual_tolerance) break;

    Eigen::MatrixXd jacobian(unknowns, unknowns);
    bool fd_ok = true;
    for (int j = 0; j < unknowns; ++j) {
      const double step = options.fd_step * std::max(1.0, std::abs(x[j]));
      Eigen::VectorXd xj = x;
      xj[j] += step;
      try {
        jacobian.col(j) = (problem.evaluate(xj).residual - current.residual) / step;
      } catch (const Error&) {
        xj[j] = x[j] - step;
        try {
          jacobian.col(j) = (current.residual - problem.evaluate(xj).residual) / step;
        } catch (const Error&) {
          fd_ok = false;
          break;
        }
      }
    }
    if (!fd_ok) break;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    // Singular directions below the finite-difference resolution (integration
    // noise ~1e-11 over a 1e-7 step) are numerically flat, e.g. the momentum
    // scaling of inert-Lagrangian problems; give them the minimum-norm step
    // instead of amplified noise.
    svd.setThreshold(1e-4);
    Eigen::VectorXd direction = svd.solve(-current.residual);
    if (!direction.allFinite()) break;
    const double cap = 1e3 * (1.0 + x.norm());
    if (direction.norm() > cap) direction *= cap / direction.norm();

    const double base_norm = current.residual.norm();
    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= options.max_halvings; ++halving) {
      const Eigen::VectorXd x_trial = x + scale * direction;
      try {
        Trial trial = problem.evaluate(x_trial);
        if (trial.residual.norm() < base_norm) {
          x = x_trial;
          current = std::move(trial);
          accepted = true;
          break;
        }
      } catch (const Error&) {
        // Step left the feasible region or lost regularity; shrink.
      }
      scale /= 2.0;
    }
    if (!accepted) break;
    if (options.on_iterate) {
      options.on_iterate(iterations + 1, current.residual.cwiseAbs().maxCoeff());
    }
    if (current.residual.norm() < best.residual.norm()) {
      best = current;
    }
  }

  if (current.residual.norm() <= best.residual.norm()) {
    best = current;
  }

  PiecewiseCurve curve(best.arcs, n, sys.control_dim());
  CovectorPath momenta;
  momenta.p = best.p;
  momenta.p0 = companion_momentum(sys, curve, best.p);
  const ResidualReport residuals = extremal_residuals(sys, curve, momenta);
  AbnormalityReport abnormality = abnormality_index(sys, curve);
  const double residual_norm = best.residual.cwiseAbs().maxCoeff();
  return ShootingResult{
      ExtremalCandidate{std::move(curve), std::move(momenta), residuals},
      residual_norm <= options.residual_tolerance, iterations, residual_norm,
      std::move(abnormality)};
}

GaugeResult gauge_transform(const SystemSpec& spec,
                            const ExtremalCandidate& candidate,
                            const std::string& f) {
  const ExprPtr f_ast = parse_expression(f);
  ExprPtr lagrangian_ast =
      spec.lagrangian.empty() ? ExprPtr() : parse_expression(spec.lagrangian);

  ExprPtr total = differentiate(f_ast, "t");
  std::vector<ExprPtr> df_dq;
  for (std::size_t k = 0; k < spec.state_names.size(); ++k) {
    const ExprPtr partial = differentiate(f_ast, spec.state_names[k]);
    df_dq.push_back(partial);
    total = Expr::add(total, Expr::multiply(partial, parse_expression(spec.psi[k])));
  }
  if (lagrangian_ast) total = Expr::add(lagrangian_ast, total);

  SystemSpec transformed_spec = spec;
  transformed_spec.lagrangian = to_string(total);

  std::vector<std::string> slots = {"t"};
  slots.insert(slots.end(), spec.state_names.begin(), spec.state_names.end());
  std::vector<CompiledExpr> gradient;
  gradient.reserve(df_dq.size());
  for (const ExprPtr& partial : df_dq) {
    gradient.emplace_back(partial, slots, spec.parameters);
  }

  const PiecewiseCurve& curve = candidate.curve;
  const int n = curve.state_dim();
  CovectorPath shifted;
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    Eigen::MatrixXd p = candidate.momenta.p[static_cast<std::size_t>(s)];
    std::vector<double> values(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= arc.steps(); ++k) {
      values[0] = arc.time_at(k);
      for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i) + 1] = arc.q(k, i);
      for (int i = 0; i < n; ++i) {
        p(k, i) += gradient[static_cast<std::size_t>(i)].eval(values);
      }
    }
    shifted.p.push_back(std::move(p));
  }

  ControlSystem transformed(transformed_spec);
  shifted.p0 = companion_momentum(transformed, curve, shifted.p);
  const ResidualReport residuals = extremal_residuals(transformed, curve, shifted);
  return GaugeResult{std::move(transformed_spec),
                     ExtremalCandidate{curve, std::move(shifted), residuals}};
}

std::vector<CovectorPath> i0_extremals(const ControlSystem& sys,
                                       const PiecewiseCurve& curve,
                                       const AbnormalityOptions& options) {
  const AnnihilatorReport space = annihilator(sys, curve, options);
  std::vector<CovectorPath> paths;

  CovectorPath trivial;
  for (int s = 0; s < curve.arc_count(); ++s) {
    trivial.p.push_back(Eigen::MatrixXd::Zero(curve.arc(s).steps() + 1,
                                              curve.state_dim()));
    trivial.p0.push_back(Eigen::VectorXd::Zero(curve.arc(s).steps() + 1));
  }
  paths.push_back(std::move(trivial));

  for (int g = 0; g < space.index; ++g) {
    CovectorPath path;
    for (int s = 0; s < curve.arc_count(); ++s) {
      const Arc& arc = curve.arc(s);
      Eigen::MatrixXd p = space.generators[static_cast<std::size_t>(g)]
                                          [static_cast<std::size_t>(s)];
      Eigen::VectorXd p0(arc.steps() + 1);
      for (int k = 0; k <= arc.steps(); ++k) {
        const Eigen::VectorXd pk = p.row(k).transpose();
        p0[k] = -pk.dot(sys.psi_value(arc.time_at(k), arc.q.row(k).transpose(),
                                      arc.z.row(k).transpose()));
      }
      path.p.push_back(std::move(p));
      path.p0.push_back(std::move(p0));
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

}  // namespace varcalc
