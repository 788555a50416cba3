#pragma once

#include <optional>

#include "varcalc/transport.hpp"

namespace varcalc {

/// Fundamental matrices Psi(t_k) of the covector transport
///   d rho / dt = -(dpsi/dq)^T rho,
/// per arc at every grid node, with Psi equal to the identity at the initial
/// time and components glued continuously across corners. A covector path
/// rho(t) = Psi(t) rho0 is exactly the transported extension of rho0.
std::vector<std::vector<Eigen::MatrixXd>> adjoint_propagator(
    const ControlSystem& sys, const PiecewiseCurve& curve);

/// Tuning knobs shared by the abnormality computations.
struct AbnormalityOptions {
  /// Relative singular value cutoff deciding what counts as zero.
  double tolerance = 1e-8;
  /// Largest admissibility defect accepted before analysing a curve.
  double admissibility_tolerance = 1e-6;
  /// Also run the subinterval normality scan.
  bool scan_local = false;
  /// Interior endpoints added to the scan grid.
  int scan_points = 16;
};

/// Basis of the space of transported covectors that annihilate the control
/// directions along the whole curve and the kinetic jumps at its corners.
struct AnnihilatorReport {
  int index = 0;               // dimension of the space
  Eigen::MatrixXd initial_basis;  // n x index, orthonormal initial covectors
  /// generators[g][arc] holds the (M+1) x n grid samples of generator g.
  std::vector<std::vector<Eigen::MatrixXd>> generators;
  /// Singular values of the stacked constraint matrix, descending.
  Eigen::VectorXd singular_values;
};

AnnihilatorReport annihilator(const ControlSystem& sys, const PiecewiseCurve& curve,
                              const AbnormalityOptions& options = {});

/// Optional metric on the controls used to weigh the Gram pairing; must be
/// symmetric positive definite wherever evaluated. Empty means identity.
using ControlMetric = std::function<Eigen::MatrixXd(int arc_index, double t)>;

/// Gram matrix of the constraint pairing on initial covectors:
///   S = integral Btilde G Btilde^T dt + sum_s alpha^2 J_s J_s^T,
/// with Btilde(t) = Psi(t)^T dpsi/dz and J_s = Psi(a_s)^T [psi]_s. Its null
/// space consists of the annihilator initial values, so rank S = n - index.
struct GramReport {
  Eigen::MatrixXd matrix;       // n x n, symmetric positive semidefinite
  Eigen::VectorXd eigenvalues;  // descending
  int rank = 0;
  std::vector<Eigen::VectorXd> corner_vectors;  // J_s, one per corner
};

GramReport gram_matrix(const ControlSystem& sys, const PiecewiseCurve& curve,
                       double corner_weight = 1.0,
                       const ControlMetric& metric = ControlMetric(),
                       double tolerance = 1e-8);

/// One abnormal window found by the subinterval scan.
struct LocalWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
  int index = 0;
};

/// Result of scanning all subintervals spanned by a grid of endpoints
/// (curve ends, corners, uniform interior points, and t = 0 when interior).
struct LocalNormalityScan {
  bool locally_normal = true;
  std::vector<LocalWindow> abnormal_windows;  // ordered by (t_lo, t_hi)
  int windows_checked = 0;
};

LocalNormalityScan local_normality_scan(const ControlSystem& sys,
                                        const PiecewiseCurve& curve,
                                        const AbnormalityOptions& options = {});

/// Full abnormality analysis: index of the curve, per-arc indices, the Gram
/// cross check, and optionally the local scan.
struct AbnormalityReport {
  int index = 0;
  bool normal = false;
  /// Normal evolutions admit no nontrivial variational degeneracy, so every
  /// deformation datum is reachable; recorded here for downstream callers.
  bool ordinary_implied = false;
  std::vector<int> arc_index;  // abnormality index of each arc alone
  AnnihilatorReport space;
  GramReport gram;
  bool gram_consistent = false;  // rank(S) == n - index
  std::optional<LocalNormalityScan> scan;
};

AbnormalityReport abnormality_index(const ControlSystem& sys,
                                    const PiecewiseCurve& curve,
                                    const AbnormalityOptions& options = {});

}  // namespace varcalc
