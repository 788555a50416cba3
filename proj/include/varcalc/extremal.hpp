#pragma once

#include <functional>
#include <string>
#include <vector>

#include "varcalc/abnormality.hpp"
#include "varcalc/curve.hpp"
#include "varcalc/system.hpp"

namespace varcalc {

/// Momentum history sampled on the same grid as a piecewise curve: the
/// state momenta p_i(t) arc by arc plus the scalar companion
/// p0(t) = L - p.psi, which stays continuous across corners whenever the
/// Hamiltonian does.
struct CovectorPath {
  std::vector<Eigen::MatrixXd> p;   ///< per arc, (steps+1) x n
  std::vector<Eigen::VectorXd> p0;  ///< per arc, steps+1
};

/// Sup-norm defects of the stationarity system for a candidate
/// curve/momenta pair. All derivatives are taken with the fourth order
/// grid stencils, so a genuine solution shows residuals at integrator
/// accuracy rather than exact zeros.
struct ResidualReport {
  double ode_q = 0.0;          ///< max |dq/dt - psi|
  double ode_p = 0.0;          ///< max |dp/dt + (dpsi/dq)^T p - dL/dq|
  double stationarity = 0.0;   ///< max |(dpsi/dz)^T p - dL/dz|
  double corner_p = 0.0;       ///< max corner jump of p
  double corner_h = 0.0;       ///< max corner jump of p.psi - L
  double p0_defect = 0.0;      ///< max |p0 - (L - p.psi)| pointwise
  double p0_evolution_defect = 0.0;  ///< p0 re-integrated from its rate equation
  double hamiltonian_regularity = 0.0;  ///< min |det d2H/dz2| over the grid

  /// Largest of the five defining residuals (the p0 cross-checks and the
  /// regularity certificate are diagnostics, not equations).
  double max_residual() const;
};

/// A candidate extremal: an admissible curve with attached momenta and the
/// most recently computed residual report for exactly this data.
struct ExtremalCandidate {
  PiecewiseCurve curve;
  CovectorPath momenta;
  ResidualReport residuals;
};

/// Value and first derivatives of the control Hamiltonian
/// H(t,q,z,p) = p.psi - L.
struct HamiltonianData {
  double value = 0.0;
  Eigen::VectorXd dh_dq;  ///< (dpsi/dq)^T p - dL/dq
  Eigen::VectorXd dh_dp;  ///< psi
  Eigen::VectorXd dh_dz;  ///< (dpsi/dz)^T p - dL/dz
};

HamiltonianData hamiltonian(const ControlSystem& sys, double t,
                            const Eigen::VectorXd& q, const Eigen::VectorXd& z,
                            const Eigen::VectorXd& p);

/// Eliminates the controls at regular points: solves dH/dz = 0 by Newton
/// iteration from a caller-supplied (or cached) seed and certifies the
/// control Hessian determinant at the solution.
class ReducedHamiltonian {
 public:
  struct Reduction {
    Eigen::VectorXd z;    ///< stationary control
    double value = 0.0;   ///< H at the stationary control
    double hessian_det = 0.0;
  };

  explicit ReducedHamiltonian(const ControlSystem& sys,
                              double newton_tolerance = 1e-12,
                              double regularity_tolerance = 1e-10,
                              int max_iterations = 50);

  /// Solves dH/dz = 0 starting from the given seed and refreshes the
  /// warm-start cache. Throws RegularityFailureError when the Hessian
  /// determinant magnitude at the solution (or at an iterate) drops below
  /// the regularity tolerance, NoConvergenceError when Newton stalls.
  Reduction solve(double t, const Eigen::VectorXd& q, const Eigen::VectorXd& p,
                  const Eigen::VectorXd& z_seed);

  /// Same, seeded with the previous solution.
  Reduction solve_warm(double t, const Eigen::VectorXd& q,
                       const Eigen::VectorXd& p);

  const Eigen::VectorXd& cached_seed() const { return warm_; }
  void set_seed(const Eigen::VectorXd& z_seed);

 private:
  const ControlSystem& sys_;
  double newton_tol_;
  double reg_tol_;
  int max_iter_;
  Eigen::VectorXd warm_;
};

/// Integrates the reduced Hamilton equations dq/dt = psi(z*),
/// dp/dt = dL/dq - (dpsi/dq)^T p (the partials of the reduced Hamiltonian
/// collapse to these by stationarity in z) over one arc, recording the
/// stationary control on the grid. The residual report is attached.
ExtremalCandidate integrate_hamilton(const ControlSystem& sys,
                                     const Eigen::VectorXd& q0,
                                     const Eigen::VectorXd& p0, double t0,
                                     double t1, const Eigen::VectorXd& z_seed,
                                     int grid_density = kDefaultGridDensity);

/// Computes the residual report of a curve/momenta pair without modifying
/// either. p0 entries of the path are checked both algebraically and by
/// re-integrating their rate equation from the initial value.
ResidualReport extremal_residuals(const ControlSystem& sys,
                                  const PiecewiseCurve& curve,
                                  const CovectorPath& momenta);

/// Fills in p0 = L - p.psi on the curve grid for given momenta samples.
std::vector<Eigen::VectorXd> companion_momentum(
    const ControlSystem& sys, const PiecewiseCurve& curve,
    const std::vector<Eigen::MatrixXd>& p);

/// Action integral of the Lagrangian along the curve (composite Simpson
/// arc by arc). Requires the system to carry a Lagrangian.
double action_value(const ControlSystem& sys, const PiecewiseCurve& curve);

struct ShootingSeeds {
  Eigen::VectorXd p_start;                  ///< initial momenta, size n
  std::vector<double> corner_times;         ///< interior corner seeds, size N-1
  std::vector<Eigen::VectorXd> z_branches;  ///< Newton branch seed per segment, size N
};

struct ShootingOptions {
  int grid_density = kDefaultGridDensity;
  double residual_tolerance = 1e-8;  ///< convergence on the sup norm
  double fd_step = 1e-7;             ///< relative finite-difference step
  int max_iterations = 100;
  int max_halvings = 30;
  /// Called once per accepted iterate with (iteration, sup-norm residual),
  /// starting at iteration 0 for the seed. For progress reporting only.
  std::function<void(int, double)> on_iterate;
};

struct ShootingResult {
  ExtremalCandidate candidate;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;   ///< sup norm of the final shooting residual
  AbnormalityReport abnormality;  ///< of the solution curve; nonzero index
                                  ///< means the momenta are non-unique
};

/// Solves the fixed-endpoint boundary value problem by shooting: unknowns
/// are the initial momenta and the interior corner times, the trajectory is
/// integrated through the corners with the per-segment control branch
/// chosen by its seed, and the residuals are the terminal state error plus
/// the Hamiltonian jump at each corner (momenta stay continuous by
/// construction). On failure to converge the best iterate is returned with
/// converged = false; callers decide whether that is an error.
ShootingResult shoot_extremal(const ControlSystem& sys,
                              const Eigen::VectorXd& q_start,
                              const Eigen::VectorXd& q_end, double t0,
                              double t1, const ShootingSeeds& seeds,
                              const ShootingOptions& options = {});

/// Rewrites the Lagrangian by the total time derivative of f(t, q) and
/// shifts the momenta accordingly; the curve is copied bit for bit. The
/// returned candidate carries freshly computed residuals against the
/// transformed system.
struct GaugeResult {
  SystemSpec spec;  ///< same system with L' = L + df/dt + (df/dq_k) psi^k
  ExtremalCandidate candidate;
};

GaugeResult gauge_transform(const SystemSpec& spec,
                            const ExtremalCandidate& candidate,
                            const std::string& f);

/// All extremal momenta of the null Lagrangian over a fixed admissible
/// curve: the trivial path first, then one path per annihilator generator
/// with p0 = -p.psi. Any momenta set for this curve is an affine space
/// modelled on the span of these generators.
std::vector<CovectorPath> i0_extremals(const ControlSystem& sys,
                                       const PiecewiseCurve& curve,
                                       const AbnormalityOptions& options = {});

}  // namespace varcalc
