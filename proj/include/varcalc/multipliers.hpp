#pragma once

#include <vector>

#include "varcalc/extremal.hpp"
#include "varcalc/system.hpp"

namespace varcalc {

/// Lagrange multiplier history on the curve grid, one column per constraint,
/// with the worst-case defect of the linear system that defines it.
struct MultiplierPath {
  std::vector<Eigen::MatrixXd> lambda;  ///< per arc, (steps+1) x m
  double residual = 0.0;  ///< max pointwise defect of p = dL/dqdot + lambda.dg/dqdot
};

/// Solves p_i = dL_free/dqdot^i + lambda^sigma dg_sigma/dqdot^i for the
/// multipliers at every grid node by least squares. The curve must satisfy
/// the extrinsic constraints along its admissible velocity (checked), and
/// dg/dqdot must keep full row rank. A defect above the consistency
/// tolerance means the candidate is not an extremal of this extrinsic
/// problem and raises InconsistentError.
MultiplierPath recover_multipliers(const ExtrinsicProblem& ext,
                                   const ControlSystem& sys,
                                   const ExtremalCandidate& candidate,
                                   double constraint_tolerance = 1e-6,
                                   double consistency_tolerance = 1e-6);

/// Residuals of the extrinsic Euler-Lagrange system for the merged
/// Lagrangian Lhat = L_free + lambda.g along the lifted curve, plus corner
/// continuity of the extrinsic momentum and energy. The multiplier jump is
/// reported but never enforced: a discontinuous recovered lambda flags a
/// non-extremal input.
struct CorrespondenceReport {
  double euler_lagrange = 0.0;   ///< sup |d/dt dLhat/dqdot - dLhat/dq|
  double constraint = 0.0;       ///< sup |g(t, q, qdot)|
  double momentum_match = 0.0;   ///< sup |dLhat/dqdot - p|
  double corner_momentum = 0.0;  ///< max corner jump of dLhat/dqdot
  double corner_energy = 0.0;    ///< max corner jump of qdot.dLhat/dqdot - Lhat
  double lambda_jump = 0.0;      ///< max corner jump of lambda
};

CorrespondenceReport verify_correspondence(const ExtrinsicProblem& ext,
                                           const ControlSystem& sys,
                                           const ExtremalCandidate& candidate,
                                           const MultiplierPath& multipliers);

}  // namespace varcalc
