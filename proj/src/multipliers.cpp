#include "varcalc/multipliers.hpp"

#include <algorithm>
#include <cmath>

namespace varcalc {

namespace {

void check_dimensions(const ExtrinsicProblem& ext, const ControlSystem& sys,
                      const ExtremalCandidate& candidate) {
  if (ext.state_dim() != sys.state_dim() ||
      candidate.curve.state_dim() != sys.state_dim()) {
    throw InvalidInputError("extrinsic problem, system and curve disagree on the state dimension");
  }
  if (candidate.momenta.p.size() != static_cast<std::size_t>(candidate.curve.arc_count())) {
    throw InvalidInputError("candidate momenta do not cover every arc");
  }
}

}  // namespace

MultiplierPath recover_multipliers(const ExtrinsicProblem& ext,
                                   const ControlSystem& sys,
                                   const ExtremalCandidate& candidate,
                                   double constraint_tolerance,
                                   double consistency_tolerance) {
  check_dimensions(ext, sys, candidate);
  const PiecewiseCurve& curve = candidate.curve;
  const int m = ext.constraint_count();

  MultiplierPath path;
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    Eigen::MatrixXd lambda(arc.steps() + 1, m);
    for (int k = 0; k <= arc.steps(); ++k) {
      const double t = arc.time_at(k);
      const Eigen::VectorXd q = arc.q.row(k).transpose();
      const Eigen::VectorXd z = arc.z.row(k).transpose();
      const Eigen::VectorXd qdot = sys.psi_value(t, q, z);

      const Eigen::VectorXd g = ext.constraint_values(t, q, qdot);
      if (m > 0 && g.cwiseAbs().maxCoeff() > constraint_tolerance) {
        throw NotAdmissibleError("extrinsic constraints violated by " +
                                 format_double(g.cwiseAbs().maxCoeff()) + " at t=" +
                                 format_double(t));
      }

      const Eigen::MatrixXd dg = ext.constraint_velocity_jacobian(t, q, qdot);
      const Eigen::VectorXd rhs =
          candidate.momenta.p[static_cast<std::size_t>(s)].row(k).transpose() -
          ext.free_momentum(t, q, qdot);

      if (m > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(dg.transpose(),
                                              Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& sigma = svd.singularValues();
        if (sigma[sigma.size() - 1] <= 1e-9 * std::max(sigma[0], 1.0)) {
          throw RankDeficiencyError("constraint velocity Jacobian loses rank at t=" +
                                    format_double(t));
        }
        const Eigen::VectorXd solution = svd.solve(rhs);
        lambda.row(k) = solution.transpose();
        path.residual = std::max(path.residual,
                                 (dg.transpose() * solution - rhs).cwiseAbs().maxCoeff());
      } else {
        path.residual = std::max(path.residual, rhs.cwiseAbs().maxCoeff());
      }
    }
    path.lambda.push_back(std::move(lambda));
  }

  if (path.residual > consistency_tolerance) {
    throw InconsistentError("momentum equation defect " + format_double(path.residual) +
                            " exceeds " + format_double(consistency_tolerance) +
                            "; the candidate is not an extremal of this extrinsic problem");
  }
  return path;
}

CorrespondenceReport verify_correspondence(const ExtrinsicProblem& ext,
                                           const ControlSystem& sys,
                                           const ExtremalCandidate& candidate,
                                           const MultiplierPath& multipliers) {
  check_dimensions(ext, sys, candidate);
  const PiecewiseCurve& curve = candidate.curve;
  const int n = curve.state_dim();
  const int m = ext.constraint_count();
  if (multipliers.lambda.size() != static_cast<std::size_t>(curve.arc_count())) {
    throw InvalidInputError("multiplier path does not cover every arc");
  }

  CorrespondenceReport report;
  Eigen::VectorXd prev_pi(n);
  double prev_energy = 0.0;
  Eigen::VectorXd prev_lambda(m);

  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    const Eigen::MatrixXd& lambda = multipliers.lambda[static_cast<std::size_t>(s)];
    if (lambda.rows() != arc.steps() + 1 || lambda.cols() != m) {
      throw InvalidInputError("multiplier samples of arc " + std::to_string(s) +
                              " do not match its grid");
    }

    Eigen::MatrixXd pi(arc.steps() + 1, n);
    Eigen::MatrixXd dlhat_dq(arc.steps() + 1, n);
    Eigen::VectorXd energy(arc.steps() + 1);
    for (int k = 0; k <= arc.steps(); ++k) {
      const double t = arc.time_at(k);
      const Eigen::VectorXd q = arc.q.row(k).transpose();
      const Eigen::VectorXd z = arc.z.row(k).transpose();
      const Eigen::VectorXd qdot = sys.psi_value(t, q, z);
      const Eigen::VectorXd lk = lambda.row(k).transpose();

      const Eigen::VectorXd g = ext.constraint_values(t, q, qdot);
      if (m > 0) {
        report.constraint = std::max(report.constraint, g.cwiseAbs().maxCoeff());
      }

      const Eigen::VectorXd pik =
          ext.free_momentum(t, q, qdot) +
          ext.constraint_velocity_jacobian(t, q, qdot).transpose() * lk;
      pi.row(k) = pik.transpose();
      dlhat_dq.row(k) = (ext.free_state_gradient(t, q, qdot) +
                         ext.constraint_state_jacobian(t, q, qdot).transpose() * lk)
                            .transpose();
      const double lhat = ext.free_lagrangian_value(t, q, qdot) + lk.dot(g);
      energy[k] = qdot.dot(pik) - lhat;

      report.momentum_match = std::max(
          report.momentum_match,
          (pik - candidate.momenta.p[static_cast<std::size_t>(s)].row(k).transpose())
              .cwiseAbs()
              .maxCoeff());
    }

    const Eigen::MatrixXd pidot = grid_time_derivative(pi, arc.step());
    report.euler_lagrange = std::max(report.euler_lagrange,
                                     (pidot - dlhat_dq).cwiseAbs().maxCoeff());

    if (s > 0) {
      report.corner_momentum = std::max(
          report.corner_momentum,
          (pi.row(0).transpose() - prev_pi).cwiseAbs().maxCoeff());
      report.corner_energy = std::max(report.corner_energy,
                                      std::abs(energy[0] - prev_energy));
      if (m > 0) {
        report.lambda_jump = std::max(
            report.lambda_jump,
            (lambda.row(0).transpose() - prev_lambda).cwiseAbs().maxCoeff());
      }
    }
    prev_pi = pi.row(arc.steps()).transpose();
    prev_energy = energy[arc.steps()];
    prev_lambda = lambda.row(arc.steps()).transpose();
  }
  return report;
}

}  // namespace varcalc
