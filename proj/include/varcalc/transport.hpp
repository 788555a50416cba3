#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "varcalc/curve.hpp"

namespace varcalc {

/// Choice of infinitesimal control: an r x n matrix field along the curve
/// pairing state directions with control corrections. Default constructed it
/// is identically zero.
class InfinitesimalControl {
 public:
  using Fn = std::function<Eigen::MatrixXd(int arc_index, double t)>;

  InfinitesimalControl() = default;
  explicit InfinitesimalControl(Fn fn) : fn_(std::move(fn)) {}

  bool is_zero() const noexcept { return !fn_; }

  /// Value at a point, validated to be r x n.
  Eigen::MatrixXd value(int arc_index, double t, int control_dim, int state_dim) const;

 private:
  Fn fn_;
};

/// Right-hand side of a matrix valued ODE Y' = f(t, Y).
using MatrixOdeRhs = std::function<Eigen::MatrixXd(double, const Eigen::MatrixXd&)>;

/// One RK4 step of size `h` with step-doubling extrapolation (fifth order
/// locally), shared by the frame and adjoint propagators.
Eigen::MatrixXd matrix_ode_step(const MatrixOdeRhs& rhs, double t,
                                const Eigen::MatrixXd& y, double h);

/// Linearised kinetic matrix in the chosen gauge:
///   A(i,k) = dpsi^i/dq^k + sum_A dpsi^i/dz^A h(A,k).
Eigen::MatrixXd transport_matrix(const ControlSystem::JacobianBundle& jac,
                                 const Eigen::MatrixXd& h);

/// Connection coefficients tau with tau(i,j) = -A(j,i); vector fields are
/// carried by X'^j + X^i tau(i,j), covectors by lambda'_j - lambda_i tau(j,i).
Eigen::MatrixXd connection_matrix(const ControlSystem::JacobianBundle& jac,
                                  const Eigen::MatrixXd& h);

/// A frame of vector fields carried along the curve by the transport law,
/// with its dual coframe, both sampled at the grid nodes of every arc.
/// Columns of frame[s][k] are the basis vectors at node k of arc s; rows of
/// coframe[s][k] are the dual forms. The frame starts as the identity at the
/// initial time and its components are copied across corners.
struct TransportedFrame {
  std::vector<std::vector<Eigen::MatrixXd>> frame;
  std::vector<std::vector<Eigen::MatrixXd>> coframe;
  double max_duality_defect = 0.0;
  double max_condition = 0.0;
};

/// Integrates the frame transport ODE F' = A F along the curve (RK4 with
/// step-doubling extrapolation, states and controls interpolated between
/// nodes). Throws SingularFrameError if the frame condition number passes
/// `condition_limit`.
TransportedFrame transport_frame(const ControlSystem& sys, const PiecewiseCurve& curve,
                                 const InfinitesimalControl& h = InfinitesimalControl(),
                                 double condition_limit = 1e12);

/// Covariant time derivative of a vector field given by grid samples
/// (per arc, (M+1) x n rows). Uses fourth order stencils for the plain time
/// derivative. Transported fields come out at the size of the stencil error.
std::vector<Eigen::MatrixXd> absolute_derivative_vector(
    const ControlSystem& sys, const PiecewiseCurve& curve,
    const InfinitesimalControl& h, const std::vector<Eigen::MatrixXd>& fields);

/// Same for covector fields (rows are components lambda_1..lambda_n).
std::vector<Eigen::MatrixXd> absolute_derivative_covector(
    const ControlSystem& sys, const PiecewiseCurve& curve,
    const InfinitesimalControl& h, const std::vector<Eigen::MatrixXd>& fields);

/// Data of an infinitesimal deformation: a control correction U(t) along
/// each arc, one time shift per interior corner, and the initial state
/// variation (empty means zero).
struct DeformationDatum {
  using ControlFn = std::function<Eigen::VectorXd(int arc_index, double t)>;
  ControlFn u;
  std::vector<double> alphas;
  Eigen::VectorXd x0;
};

/// State variation produced by a deformation datum: frame components are
/// obtained by cumulative quadrature of U against the coframe, jump by
/// -alpha_s * coframe * kinetic jump at each corner, and map back to
/// coordinates through the frame.
struct VariationResult {
  std::vector<Eigen::MatrixXd> frame_components;       // per arc, (M+1) x n
  std::vector<Eigen::MatrixXd> coordinate_components;  // per arc, (M+1) x n
  Eigen::VectorXd endpoint;                            // coordinates at t_end
};

VariationResult variational_integrate(const ControlSystem& sys,
                                      const PiecewiseCurve& curve,
                                      const TransportedFrame& frame,
                                      const DeformationDatum& datum);

}  // namespace varcalc
