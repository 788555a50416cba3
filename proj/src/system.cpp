#include "varcalc/system.hpp"

#include <cmath>
#include <set>
#include <utility>

namespace varcalc {

namespace {

bool valid_name(const std::string& name) {
  if (name.empty()) return false;
  auto start = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  auto part = [&](char c) { return start(c) || (c >= '0' && c <= '9'); };
  if (!start(name[0])) return false;
  for (char c : name) {
    if (!part(c)) return false;
  }
  return true;
}

void check_names(const std::vector<std::string>& names, const char* what,
                 std::set<std::string>& seen) {
  for (const std::string& name : names) {
    if (!valid_name(name)) {
      throw InvalidInputError(std::string(what) + " name '" + name +
                              "' is not a valid identifier");
    }
    if (name == "t") {
      throw InvalidInputError("'t' is reserved for the independent variable");
    }
    if (!seen.insert(name).second) {
      throw InvalidInputError("duplicate name '" + name + "'");
    }
  }
}

void check_vector_size(const Eigen::VectorXd& v, int expected, const char* what) {
  if (v.size() != expected) {
    throw InvalidInputError(std::string(what) + " has size " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(expected));
  }
}

std::string format_tuple(std::span<const double> values) {
  std::string out = "(";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  out += ")";
  return out;
}

}  // namespace

ControlSystem::ControlSystem(const SystemSpec& spec) : spec_(spec) {
  n_ = static_cast<int>(spec_.state_names.size());
  r_ = static_cast<int>(spec_.control_names.size());
  if (n_ < 1) throw InvalidInputError("a system needs at least one state");
  if (r_ < 1) throw InvalidInputError("a system needs at least one control");
  if (r_ > n_) {
    throw InvalidInputError("control dimension " + std::to_string(r_) +
                            " exceeds state dimension " + std::to_string(n_));
  }
  if (static_cast<int>(spec_.psi.size()) != n_) {
    throw InvalidInputError("expected " + std::to_string(n_) +
                            " kinetic expressions, got " +
                            std::to_string(spec_.psi.size()));
  }

  std::set<std::string> seen;
  check_names(spec_.state_names, "state", seen);
  check_names(spec_.control_names, "control", seen);
  for (const auto& [pname, value] : spec_.parameters) {
    (void)value;
    if (!valid_name(pname) || pname == "t" || seen.count(pname)) {
      throw InvalidInputError("parameter name '" + pname +
                              "' is invalid or collides with another name");
    }
  }

  slot_names_.reserve(static_cast<std::size_t>(1 + n_ + r_));
  slot_names_.push_back("t");
  for (const auto& s : spec_.state_names) slot_names_.push_back(s);
  for (const auto& c : spec_.control_names) slot_names_.push_back(c);

  has_lag_ = !spec_.lagrangian.empty();

  auto compile = [&](const ExprPtr& ast) {
    return CompiledExpr(ast, slot_names_, spec_.parameters);
  };

  psi_ast_.resize(static_cast<std::size_t>(n_));
  psi_c_.resize(static_cast<std::size_t>(n_));
  dpsi_dq_c_.resize(static_cast<std::size_t>(n_));
  dpsi_dz_c_.resize(static_cast<std::size_t>(n_));
  dpsi_dt_c_.resize(static_cast<std::size_t>(n_));
  d2psi_dzz_c_.resize(static_cast<std::size_t>(n_));
  psi_label_.resize(static_cast<std::size_t>(n_));

  for (int i = 0; i < n_; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    psi_label_[ui] = spec_.psi[ui];
    psi_ast_[ui] = parse_expression(spec_.psi[ui]);
    psi_c_[ui] = compile(psi_ast_[ui]);
    dpsi_dq_c_[ui].resize(static_cast<std::size_t>(n_));
    for (int k = 0; k < n_; ++k) {
      dpsi_dq_c_[ui][static_cast<std::size_t>(k)] =
          compile(differentiate(psi_ast_[ui], spec_.state_names[static_cast<std::size_t>(k)]));
    }
    std::vector<ExprPtr> dz_ast(static_cast<std::size_t>(r_));
    dpsi_dz_c_[ui].resize(static_cast<std::size_t>(r_));
    for (int a = 0; a < r_; ++a) {
      dz_ast[static_cast<std::size_t>(a)] =
          differentiate(psi_ast_[ui], spec_.control_names[static_cast<std::size_t>(a)]);
      dpsi_dz_c_[ui][static_cast<std::size_t>(a)] = compile(dz_ast[static_cast<std::size_t>(a)]);
    }
    dpsi_dt_c_[ui] = compile(differentiate(psi_ast_[ui], "t"));
    d2psi_dzz_c_[ui].resize(static_cast<std::size_t>(r_));
    for (int a = 0; a < r_; ++a) {
      d2psi_dzz_c_[ui][static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(r_));
      for (int b = a; b < r_; ++b) {
        d2psi_dzz_c_[ui][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
            compile(differentiate(dz_ast[static_cast<std::size_t>(a)],
                                  spec_.control_names[static_cast<std::size_t>(b)]));
      }
    }
  }

  if (has_lag_) {
    lag_label_ = spec_.lagrangian;
    lag_ast_ = parse_expression(spec_.lagrangian);
    lag_c_ = compile(lag_ast_);
    dlag_dq_c_.resize(static_cast<std::size_t>(n_));
    for (int k = 0; k < n_; ++k) {
      dlag_dq_c_[static_cast<std::size_t>(k)] =
          compile(differentiate(lag_ast_, spec_.state_names[static_cast<std::size_t>(k)]));
    }
    std::vector<ExprPtr> dz_ast(static_cast<std::size_t>(r_));
    dlag_dz_c_.resize(static_cast<std::size_t>(r_));
    for (int a = 0; a < r_; ++a) {
      dz_ast[static_cast<std::size_t>(a)] =
          differentiate(lag_ast_, spec_.control_names[static_cast<std::size_t>(a)]);
      dlag_dz_c_[static_cast<std::size_t>(a)] = compile(dz_ast[static_cast<std::size_t>(a)]);
    }
    dlag_dt_c_ = compile(differentiate(lag_ast_, "t"));
    d2lag_dzz_c_.resize(static_cast<std::size_t>(r_));
    for (int a = 0; a < r_; ++a) {
      d2lag_dzz_c_[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(r_));
      for (int b = a; b < r_; ++b) {
        d2lag_dzz_c_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
            compile(differentiate(dz_ast[static_cast<std::size_t>(a)],
                                  spec_.control_names[static_cast<std::size_t>(b)]));
      }
    }
  }
}

void ControlSystem::fill_slots(double t, const Eigen::VectorXd& q,
                               const Eigen::VectorXd& z,
                               std::vector<double>& slots) const {
  check_vector_size(q, n_, "state vector");
  check_vector_size(z, r_, "control vector");
  slots.resize(static_cast<std::size_t>(1 + n_ + r_));
  slots[0] = t;
  for (int i = 0; i < n_; ++i) slots[static_cast<std::size_t>(1 + i)] = q[i];
  for (int a = 0; a < r_; ++a) slots[static_cast<std::size_t>(1 + n_ + a)] = z[a];
}

std::string ControlSystem::describe_point(std::span<const double> slots) const {
  std::string out = "t=" + format_double(slots[0]);
  out += ", q=" + format_tuple(slots.subspan(1, static_cast<std::size_t>(n_)));
  out += ", z=" + format_tuple(slots.subspan(static_cast<std::size_t>(1 + n_),
                                             static_cast<std::size_t>(r_)));
  return out;
}

double ControlSystem::checked_eval(const CompiledExpr& ce, const std::string& label,
                                   std::span<const double> slots) const {
  const double value = ce.eval(slots);
  if (!std::isfinite(value)) {
    throw NonFiniteError("expression '" + label + "' evaluated to " +
                         format_double(value) + " at " + describe_point(slots));
  }
  return value;
}

Eigen::VectorXd ControlSystem::psi_value(double t, const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& z) const {
  std::vector<double> slots;
  fill_slots(t, q, z, slots);
  Eigen::VectorXd out(n_);
  for (int i = 0; i < n_; ++i) {
    out[i] = checked_eval(psi_c_[static_cast<std::size_t>(i)],
                          psi_label_[static_cast<std::size_t>(i)], slots);
  }
  return out;
}

double ControlSystem::lagrangian_value(double t, const Eigen::VectorXd& q,
                                       const Eigen::VectorXd& z) const {
  if (!has_lag_) throw InvalidInputError("system has no Lagrangian");
  std::vector<double> slots;
  fill_slots(t, q, z, slots);
  return checked_eval(lag_c_, lag_label_, slots);
}

ControlSystem::JacobianBundle ControlSystem::jacobians(
    double t, const Eigen::VectorXd& q, const Eigen::VectorXd& z) const {
  std::vector<double> slots;
  fill_slots(t, q, z, slots);

  JacobianBundle out;
  out.psi.resize(n_);
  out.dpsi_dq.resize(n_, n_);
  out.dpsi_dz.resize(n_, r_);
  out.dpsi_dt.resize(n_);
  out.dlag_dq = Eigen::VectorXd::Zero(n_);
  out.dlag_dz = Eigen::VectorXd::Zero(r_);

  for (int i = 0; i < n_; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const std::string& label = psi_label_[ui];
    out.psi[i] = checked_eval(psi_c_[ui], label, slots);
    for (int k = 0; k < n_; ++k) {
      out.dpsi_dq(i, k) = checked_eval(dpsi_dq_c_[ui][static_cast<std::size_t>(k)], label, slots);
    }
    for (int a = 0; a < r_; ++a) {
      out.dpsi_dz(i, a) = checked_eval(dpsi_dz_c_[ui][static_cast<std::size_t>(a)], label, slots);
    }
    out.dpsi_dt[i] = checked_eval(dpsi_dt_c_[ui], label, slots);
  }

  if (has_lag_) {
    out.lag = checked_eval(lag_c_, lag_label_, slots);
    for (int k = 0; k < n_; ++k) {
      out.dlag_dq[k] = checked_eval(dlag_dq_c_[static_cast<std::size_t>(k)], lag_label_, slots);
    }
    for (int a = 0; a < r_; ++a) {
      out.dlag_dz[a] = checked_eval(dlag_dz_c_[static_cast<std::size_t>(a)], lag_label_, slots);
    }
    out.dlag_dt = checked_eval(dlag_dt_c_, lag_label_, slots);
  }
  return out;
}

Eigen::MatrixXd ControlSystem::psi_control_jacobian(double t, const Eigen::VectorXd& q,
                                                    const Eigen::VectorXd& z) const {
  std::vector<double> slots;
  fill_slots(t, q, z, slots);
  Eigen::MatrixXd out(n_, r_);
  for (int i = 0; i < n_; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (int a = 0; a < r_; ++a) {
      out(i, a) = checked_eval(dpsi_dz_c_[ui][static_cast<std::size_t>(a)],
                               psi_label_[ui], slots);
    }
  }
  return out;
}

Eigen::MatrixXd ControlSystem::pontryagin_hessian(double t, const Eigen::VectorXd& q,
                                                  const Eigen::VectorXd& z,
                                                  const Eigen::VectorXd& p) const {
  check_vector_size(p, n_, "momentum vector");
  std::vector<double> slots;
  fill_slots(t, q, z, slots);
  Eigen::MatrixXd h(r_, r_);
  for (int a = 0; a < r_; ++a) {
    for (int b = a; b < r_; ++b) {
      double value = 0.0;
      for (int i = 0; i < n_; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        value += p[i] * checked_eval(
                            d2psi_dzz_c_[ui][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)],
                            psi_label_[ui], slots);
      }
      if (has_lag_) {
        value -= checked_eval(
            d2lag_dzz_c_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)],
            lag_label_, slots);
      }
      h(a, b) = value;
      h(b, a) = value;
    }
  }
  return h;
}

void ControlSystem::check_rank(double t, const Eigen::VectorXd& q,
                               const Eigen::VectorXd& z, double rank_tolerance) const {
  const Eigen::MatrixXd jac = psi_control_jacobian(t, q, z);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = rank_tolerance * std::max(1.0, sigma.size() ? sigma[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i) {
    if (sigma[i] > cutoff) ++rank;
  }
  if (rank < r_) {
    std::vector<double> slots;
    fill_slots(t, q, z, slots);
    throw RankDeficiencyError(
        "control distribution has rank " + std::to_string(rank) + " < " +
        std::to_string(r_) + " at " + describe_point(slots));
  }
}

// ---------------------------------------------------------------------------
// ExtrinsicProblem
// ---------------------------------------------------------------------------

ExtrinsicProblem::ExtrinsicProblem(const ExtrinsicSpec& spec) : spec_(spec) {
  n_ = static_cast<int>(spec_.state_names.size());
  m_ = static_cast<int>(spec_.constraints.size());
  if (n_ < 1) throw InvalidInputError("an extrinsic problem needs at least one state");
  if (m_ < 0 || m_ >= n_) {
    throw InvalidInputError("constraint count " + std::to_string(m_) +
                            " must be below the state dimension " + std::to_string(n_));
  }
  if (spec_.free_lagrangian.empty()) {
    throw InvalidInputError("an extrinsic problem needs a free Lagrangian");
  }

  std::set<std::string> seen;
  check_names(spec_.state_names, "state", seen);
  std::vector<std::string> velocity_names;
  velocity_names.reserve(static_cast<std::size_t>(n_));
  for (const auto& s : spec_.state_names) velocity_names.push_back(s + "dot");
  check_names(velocity_names, "velocity", seen);
  for (const auto& [pname, value] : spec_.parameters) {
    (void)value;
    if (!valid_name(pname) || pname == "t" || seen.count(pname)) {
      throw InvalidInputError("parameter name '" + pname +
                              "' is invalid or collides with another name");
    }
  }

  slot_names_.reserve(static_cast<std::size_t>(1 + 2 * n_));
  slot_names_.push_back("t");
  for (const auto& s : spec_.state_names) slot_names_.push_back(s);
  for (const auto& v : velocity_names) slot_names_.push_back(v);

  auto compile = [&](const ExprPtr& ast) {
    return CompiledExpr(ast, slot_names_, spec_.parameters);
  };

  g_c_.resize(static_cast<std::size_t>(m_));
  dg_dqdot_c_.resize(static_cast<std::size_t>(m_));
  dg_dq_c_.resize(static_cast<std::size_t>(m_));
  g_label_.resize(static_cast<std::size_t>(m_));
  for (int s = 0; s < m_; ++s) {
    const auto us = static_cast<std::size_t>(s);
    g_label_[us] = spec_.constraints[us];
    ExprPtr ast = parse_expression(spec_.constraints[us]);
    g_c_[us] = compile(ast);
    dg_dqdot_c_[us].resize(static_cast<std::size_t>(n_));
    dg_dq_c_[us].resize(static_cast<std::size_t>(n_));
    for (int k = 0; k < n_; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      dg_dqdot_c_[us][uk] = compile(differentiate(ast, velocity_names[uk]));
      dg_dq_c_[us][uk] = compile(differentiate(ast, spec_.state_names[uk]));
    }
  }

  lag_label_ = spec_.free_lagrangian;
  ExprPtr lag_ast = parse_expression(spec_.free_lagrangian);
  lag_c_ = compile(lag_ast);
  dlag_dqdot_c_.resize(static_cast<std::size_t>(n_));
  dlag_dq_c_.resize(static_cast<std::size_t>(n_));
  for (int k = 0; k < n_; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    dlag_dqdot_c_[uk] = compile(differentiate(lag_ast, velocity_names[uk]));
    dlag_dq_c_[uk] = compile(differentiate(lag_ast, spec_.state_names[uk]));
  }
}

void ExtrinsicProblem::fill_slots(double t, const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& qdot,
                                  std::vector<double>& slots) const {
  check_vector_size(q, n_, "state vector");
  check_vector_size(qdot, n_, "velocity vector");
  slots.resize(static_cast<std::size_t>(1 + 2 * n_));
  slots[0] = t;
  for (int i = 0; i < n_; ++i) {
    slots[static_cast<std::size_t>(1 + i)] = q[i];
    slots[static_cast<std::size_t>(1 + n_ + i)] = qdot[i];
  }
}

double ExtrinsicProblem::checked_eval(const CompiledExpr& ce, const std::string& label,
                                      std::span<const double> slots) const {
  const double value = ce.eval(slots);
  if (!std::isfinite(value)) {
    std::string point = "t=" + format_double(slots[0]);
    point += ", q=" + format_tuple(slots.subspan(1, static_cast<std::size_t>(n_)));
    point += ", qdot=" + format_tuple(slots.subspan(static_cast<std::size_t>(1 + n_),
                                                    static_cast<std::size_t>(n_)));
    throw NonFiniteError("expression '" + label + "' evaluated to " +
                         format_double(value) + " at " + point);
  }
  return value;
}

Eigen::VectorXd ExtrinsicProblem::constraint_values(double t, const Eigen::VectorXd& q,
                                                    const Eigen::VectorXd& qdot) const {
  std::vector<double> slots;
  fill_slots(t, q, qdot, slots);
  Eigen::VectorXd out(m_);
  for (int s = 0; s < m_; ++s) {
    out[s] = checked_eval(g_c_[static_cast<std::size_t>(s)],
                          g_label_[static_cast<std::size_t>(s)], slots);
  }
  return out;
}

Eigen::MatrixXd ExtrinsicProblem::constraint_velocity_jacobian(
    double t, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot) const {
  std::vector<double> slots;
  fill_slots(t, q, qdot, slots);
  Eigen::MatrixXd out(m_, n_);
  for (int s = 0; s < m_; ++s) {
    const auto us = static_cast<std::size_t>(s);
    for (int k = 0; k < n_; ++k) {
      out(s, k) = checked_eval(dg_dqdot_c_[us][static_cast<std::size_t>(k)],
                               g_label_[us], slots);
    }
  }
  return out;
}

Eigen::MatrixXd ExtrinsicProblem::constraint_state_jacobian(
    double t, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot) const {
  std::vector<double> slots;
  fill_slots(t, q, qdot, slots);
  Eigen::MatrixXd out(m_, n_);
  for (int s = 0; s < m_; ++s) {
    const auto us = static_cast<std::size_t>(s);
    for (int k = 0; k < n_; ++k) {
      out(s, k) = checked_eval(dg_dq_c_[us][static_cast<std::size_t>(k)],
                               g_label_[us], slots);
    }
  }
  return out;
}

double ExtrinsicProblem::free_lagrangian_value(double t, const Eigen::VectorXd& q,
                                               const Eigen::VectorXd& qdot) const {
  std::vector<double> slots;
  fill_slots(t, q, qdot, slots);
  return checked_eval(lag_c_, lag_label_, slots);
}

Eigen::VectorXd ExtrinsicProblem::free_momentum(double t, const Eigen::VectorXd& q,
                                                const Eigen::VectorXd& qdot) const {
  std::vector<double> slots;
  fill_slots(t, q, qdot, slots);
  Eigen::VectorXd out(n_);
  for (int k = 0; k < n_; ++k) {
    out[k] = checked_eval(dlag_dqdot_c_[static_cast<std::size_t>(k)], lag_label_, slots);
  }
  return out;
}

Eigen::VectorXd ExtrinsicProblem::free_state_gradient(double t, const Eigen::VectorXd& q,
                                                      const Eigen::VectorXd& qdot) const {
  std::vector<double> slots;
  fill_slots(t, q, qdot, slots);
  Eigen::VectorXd out(n_);
  for (int k = 0; k < n_; ++k) {
    out[k] = checked_eval(dlag_dq_c_[static_cast<std::size_t>(k)], lag_label_, slots);
  }
  return out;
}

}  // namespace varcalc
