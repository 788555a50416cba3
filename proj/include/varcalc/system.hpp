#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "varcalc/expr.hpp"

namespace varcalc {

/// Textual definition of a control system on the event space t, q1..qn:
/// kinetic expressions give dq^i/dt = psi^i(t, q, z) with controls z1..zr,
/// r <= n, and an optional Lagrangian density L(t, q, z).
struct SystemSpec {
  std::vector<std::string> state_names;
  std::vector<std::string> control_names;
  std::vector<std::string> psi;
  std::string lagrangian;  // empty means "geometry only"
  Environment parameters;
};

/// Compiled control system. All model expressions and the symbolic first and
/// second derivatives needed by the solvers are parsed, differentiated and
/// flattened once at construction; evaluation afterwards is allocation-free
/// per expression and thread safe.
class ControlSystem {
 public:
  explicit ControlSystem(const SystemSpec& spec);

  int state_dim() const noexcept { return n_; }
  int control_dim() const noexcept { return r_; }
  bool has_lagrangian() const noexcept { return has_lag_; }
  const std::vector<std::string>& state_names() const noexcept { return spec_.state_names; }
  const std::vector<std::string>& control_names() const noexcept { return spec_.control_names; }
  const Environment& parameters() const noexcept { return spec_.parameters; }
  const SystemSpec& spec() const noexcept { return spec_; }

  /// Kinetic right-hand side psi(t, q, z). Throws NonFiniteError when any
  /// component comes out NaN or infinite, naming the expression and point.
  Eigen::VectorXd psi_value(double t, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& z) const;

  /// Lagrangian density at a point. Requires has_lagrangian().
  double lagrangian_value(double t, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& z) const;

  /// Values and first derivatives of psi and L at one point. Lagrangian
  /// slots are zero when the system has no Lagrangian.
  struct JacobianBundle {
    Eigen::VectorXd psi;      // n
    Eigen::MatrixXd dpsi_dq;  // n x n, (i,k) = d psi^i / d q^k
    Eigen::MatrixXd dpsi_dz;  // n x r, (i,A) = d psi^i / d z^A
    Eigen::VectorXd dpsi_dt;  // n
    double lag = 0.0;
    Eigen::VectorXd dlag_dq;  // n
    Eigen::VectorXd dlag_dz;  // r
    double dlag_dt = 0.0;
  };
  JacobianBundle jacobians(double t, const Eigen::VectorXd& q,
                           const Eigen::VectorXd& z) const;

  /// d psi / d z alone (n x r).
  Eigen::MatrixXd psi_control_jacobian(double t, const Eigen::VectorXd& q,
                                       const Eigen::VectorXd& z) const;

  /// Hessian in the controls of the Pontryagin function H = p.psi - L,
  /// entry (A,B) = p_i d2 psi^i / dz^A dz^B - d2 L / dz^A dz^B. Exactly
  /// symmetric: the upper triangle is computed and mirrored.
  Eigen::MatrixXd pontryagin_hessian(double t, const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& z,
                                     const Eigen::VectorXd& p) const;

  /// Verifies rank d psi / d z == r at the given point. Throws
  /// RankDeficiencyError otherwise. Singular values below
  /// rank_tolerance * max(sigma_max, 1) count as zero.
  void check_rank(double t, const Eigen::VectorXd& q, const Eigen::VectorXd& z,
                  double rank_tolerance = 1e-9) const;

  /// Parsed kinetic expression for state i (parameters not substituted).
  const ExprPtr& psi_expr(int i) const { return psi_ast_[static_cast<std::size_t>(i)]; }
  /// Parsed Lagrangian. Null when the system has none.
  const ExprPtr& lagrangian_expr() const { return lag_ast_; }

 private:
  void fill_slots(double t, const Eigen::VectorXd& q, const Eigen::VectorXd& z,
                  std::vector<double>& slots) const;
  double checked_eval(const CompiledExpr& ce, const std::string& label,
                      std::span<const double> slots) const;
  std::string describe_point(std::span<const double> slots) const;

  SystemSpec spec_;
  int n_ = 0;
  int r_ = 0;
  bool has_lag_ = false;
  std::vector<std::string> slot_names_;  // [t, q..., z...]

  std::vector<ExprPtr> psi_ast_;
  ExprPtr lag_ast_;

  std::vector<CompiledExpr> psi_c_;                  // n
  std::vector<std::vector<CompiledExpr>> dpsi_dq_c_; // n x n
  std::vector<std::vector<CompiledExpr>> dpsi_dz_c_; // n x r
  std::vector<CompiledExpr> dpsi_dt_c_;              // n
  std::vector<std::vector<std::vector<CompiledExpr>>> d2psi_dzz_c_;  // n x r x r (upper)
  CompiledExpr lag_c_;
  std::vector<CompiledExpr> dlag_dq_c_;              // n
  std::vector<CompiledExpr> dlag_dz_c_;              // r
  CompiledExpr dlag_dt_c_;
  std::vector<std::vector<CompiledExpr>> d2lag_dzz_c_;  // r x r (upper)

  std::vector<std::string> psi_label_;
  std::string lag_label_;
};

/// Textual definition of the same variational problem in extrinsic form: a
/// free Lagrangian L(t, q, qdot) restricted by kinetic constraints
/// g_sigma(t, q, qdot) = 0. Velocity symbols are the state names with "dot"
/// appended (state "x" -> velocity "xdot").
struct ExtrinsicSpec {
  std::vector<std::string> state_names;
  std::string free_lagrangian;
  std::vector<std::string> constraints;
  Environment parameters;
};

/// Compiled extrinsic problem: constraint values/derivatives and the free
/// Lagrangian with its velocity gradient (the free momentum).
class ExtrinsicProblem {
 public:
  explicit ExtrinsicProblem(const ExtrinsicSpec& spec);

  int state_dim() const noexcept { return n_; }
  int constraint_count() const noexcept { return m_; }
  const std::vector<std::string>& state_names() const noexcept { return spec_.state_names; }
  const ExtrinsicSpec& spec() const noexcept { return spec_; }

  Eigen::VectorXd constraint_values(double t, const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& qdot) const;
  /// (m x n) matrix dg_sigma / d qdot^k.
  Eigen::MatrixXd constraint_velocity_jacobian(double t, const Eigen::VectorXd& q,
                                               const Eigen::VectorXd& qdot) const;
  /// (m x n) matrix dg_sigma / d q^k.
  Eigen::MatrixXd constraint_state_jacobian(double t, const Eigen::VectorXd& q,
                                            const Eigen::VectorXd& qdot) const;

  double free_lagrangian_value(double t, const Eigen::VectorXd& q,
                               const Eigen::VectorXd& qdot) const;
  /// dL/dqdot of the free Lagrangian (length n).
  Eigen::VectorXd free_momentum(double t, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& qdot) const;
  /// dL/dq of the free Lagrangian (length n).
  Eigen::VectorXd free_state_gradient(double t, const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& qdot) const;

 private:
  void fill_slots(double t, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                  std::vector<double>& slots) const;
  double checked_eval(const CompiledExpr& ce, const std::string& label,
                      std::span<const double> slots) const;

  ExtrinsicSpec spec_;
  int n_ = 0;
  int m_ = 0;
  std::vector<std::string> slot_names_;  // [t, q..., qdot...]

  std::vector<CompiledExpr> g_c_;                    // m
  std::vector<std::vector<CompiledExpr>> dg_dqdot_c_;  // m x n
  std::vector<std::vector<CompiledExpr>> dg_dq_c_;     // m x n
  CompiledExpr lag_c_;
  std::vector<CompiledExpr> dlag_dqdot_c_;           // n
  std::vector<CompiledExpr> dlag_dq_c_;              // n
  std::vector<std::string> g_label_;
  std::string lag_label_;
};

}  // namespace varcalc
