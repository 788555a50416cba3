#include "varcalc/abnormality.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>
#include <utility>

namespace varcalc {

std::vector<std::vector<Eigen::MatrixXd>> adjoint_propagator(
    const ControlSystem& sys, const PiecewiseCurve& curve) {
  const int n = sys.state_dim();
  CurveSampler sampler(sys, curve);
  std::vector<std::vector<Eigen::MatrixXd>> out;
  Eigen::MatrixXd current = Eigen::MatrixXd::Identity(n, n);
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    MatrixOdeRhs rhs = [&](double t, const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
      const auto jac = sys.jacobians(t, sampler.q_at(s, t), sampler.z_at(s, t));
      return -(jac.dpsi_dq.transpose() * m);
    };
    std::vector<Eigen::MatrixXd> nodes;
    nodes.reserve(static_cast<std::size_t>(arc.steps() + 1));
    for (int k = 0; k <= arc.steps(); ++k) {
      if (k > 0) {
        const double tk = arc.time_at(k - 1);
        current = matrix_ode_step(rhs, tk, current, arc.time_at(k) - tk);
      }
      nodes.push_back(current);
    }
    out.push_back(std::move(nodes));
  }
  return out;
}

namespace {

void require_admissible(const ControlSystem& sys, const PiecewiseCurve& curve,
                        double tolerance) {
  const double defect = admissibility_residual(sys, curve);
  if (!(defect <= tolerance)) {
    throw NotAdmissibleError("curve violates the kinetic equations by " +
                             format_double(defect) + " (tolerance " +
                             format_double(tolerance) + ")");
  }
}

void sign_normalize_columns(Eigen::MatrixXd& basis) {
  for (int c = 0; c < basis.cols(); ++c) {
    int lead = 0;
    for (int i = 1; i < basis.rows(); ++i) {
      if (std::abs(basis(i, c)) > std::abs(basis(lead, c))) lead = i;
    }
    if (basis(lead, c) < 0.0) basis.col(c) = -basis.col(c);
  }
}

int parse_thread_budget() {
  if (const char* env = std::getenv("VARCALC_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed >= 1 && parsed <= 64) {
      return static_cast<int>(parsed);
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

}  // namespace

AnnihilatorReport annihilator(const ControlSystem& sys, const PiecewiseCurve& curve,
                              const AbnormalityOptions& options) {
  require_admissible(sys, curve, options.admissibility_tolerance);
  const int n = sys.state_dim();
  const int r = sys.control_dim();
  const auto psi_nodes = adjoint_propagator(sys, curve);
  const auto jumps = corner_jumps(sys, curve);

  Eigen::Index rows = 0;
  for (int s = 0; s < curve.arc_count(); ++s) {
    rows += static_cast<Eigen::Index>(curve.arc(s).steps() + 1) * r;
  }
  rows += curve.arc_count() - 1;

  Eigen::MatrixXd constraints(rows, n);
  Eigen::Index row = 0;
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    const auto& nodes = psi_nodes[static_cast<std::size_t>(s)];
    for (int k = 0; k <= arc.steps(); ++k) {
      const Eigen::MatrixXd b = sys.psi_control_jacobian(
          arc.time_at(k), arc.q.row(k).transpose(), arc.z.row(k).transpose());
      constraints.block(row, 0, r, n) =
          b.transpose() * nodes[static_cast<std::size_t>(k)];
      row += r;
    }
  }
  for (std::size_t s = 0; s < jumps.size(); ++s) {
    constraints.row(row++) = jumps[s].transpose() * psi_nodes[s].back();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = options.tolerance * (sigma.size() ? sigma[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i) {
    if (sigma[i] > cutoff) ++rank;
  }

  AnnihilatorReport report;
  report.index = n - rank;
  report.singular_values = sigma;
  report.initial_basis = svd.matrixV().rightCols(report.index);
  sign_normalize_columns(report.initial_basis);

  for (int g = 0; g < report.index; ++g) {
    std::vector<Eigen::MatrixXd> per_arc;
    for (int s = 0; s < curve.arc_count(); ++s) {
      const Arc& arc = curve.arc(s);
      Eigen::MatrixXd samples(arc.steps() + 1, n);
      for (int k = 0; k <= arc.steps(); ++k) {
        samples.row(k) =
            (psi_nodes[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] *
             report.initial_basis.col(g))
                .transpose();
      }
      per_arc.push_back(std::move(samples));
    }
    report.generators.push_back(std::move(per_arc));
  }
  return report;
}

GramReport gram_matrix(const ControlSystem& sys, const PiecewiseCurve& curve,
                       double corner_weight, const ControlMetric& metric,
                       double tolerance) {
  const int n = sys.state_dim();
  const int r = sys.control_dim();
  const auto psi_nodes = adjoint_propagator(sys, curve);
  const auto jumps = corner_jumps(sys, curve);

  GramReport report;
  report.matrix = Eigen::MatrixXd::Zero(n, n);

  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    const double h = arc.step();
    for (int k = 0; k <= arc.steps(); ++k) {
      const double tk = arc.time_at(k);
      const Eigen::MatrixXd b = sys.psi_control_jacobian(
          tk, arc.q.row(k).transpose(), arc.z.row(k).transpose());
      const Eigen::MatrixXd btilde =
          psi_nodes[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)].transpose() * b;
      double w = (k == 0 || k == arc.steps()) ? h / 3.0
                 : (k % 2 == 1)               ? 4.0 * h / 3.0
                                              : 2.0 * h / 3.0;
      if (metric) {
        Eigen::MatrixXd g = metric(s, tk);
        if (g.rows() != r || g.cols() != r) {
          throw BadMetricError("control metric must be " + std::to_string(r) + "x" +
                               std::to_string(r));
        }
        const double asymmetry = (g - g.transpose()).cwiseAbs().maxCoeff();
        if (asymmetry > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff())) {
          throw BadMetricError("control metric is not symmetric at t=" +
                               format_double(tk));
        }
        Eigen::LLT<Eigen::MatrixXd> llt(g);
        if (llt.info() != Eigen::Success) {
          throw BadMetricError("control metric is not positive definite at t=" +
                               format_double(tk));
        }
        report.matrix += w * btilde * g * btilde.transpose();
      } else {
        report.matrix += w * btilde * btilde.transpose();
      }
    }
  }

  for (std::size_t s = 0; s < jumps.size(); ++s) {
    const Eigen::VectorXd j = psi_nodes[s].back().transpose() * jumps[s];
    report.matrix += (corner_weight * corner_weight) * (j * j.transpose());
    report.corner_vectors.push_back(j);
  }

  // Symmetrise exactly against accumulation roundoff.
  report.matrix = ((report.matrix + report.matrix.transpose()) / 2.0).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(report.matrix);
  Eigen::VectorXd ascending = solver.eigenvalues().cwiseMax(0.0);
  report.eigenvalues = ascending.reverse();
  // Rank by the relative spectral cutoff of S itself. Null eigenvalues of
  // the quadrature come out at accumulation-roundoff size (about 1e-16
  // relative), so the decision stays stable for any tolerance above that.
  const double cutoff = tolerance * report.eigenvalues[0];
  report.rank = 0;
  for (int i = 0; i < n; ++i) {
    if (report.eigenvalues[i] > cutoff) ++report.rank;
  }
  return report;
}

LocalNormalityScan local_normality_scan(const ControlSystem& sys,
                                        const PiecewiseCurve& curve,
                                        const AbnormalityOptions& options) {
  const double t0 = curve.t_start();
  const double t1 = curve.t_end();
  const double span = t1 - t0;

  std::vector<double> grid = {t0, t1};
  for (double a : curve.corner_times()) grid.push_back(a);
  if (t0 < 0.0 && 0.0 < t1) grid.push_back(0.0);
  for (int i = 1; i <= options.scan_points; ++i) {
    grid.push_back(t0 + span * i / (options.scan_points + 1));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [&](double a, double b) { return b - a <= 1e-12 * span; }),
             grid.end());

  struct Window {
    double lo, hi;
  };
  std::vector<Window> windows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      windows.push_back({grid[i], grid[j]});
    }
  }

  AbnormalityOptions window_options = options;
  window_options.scan_local = false;

  std::vector<int> indices(windows.size(), 0);
  std::vector<std::exception_ptr> failures(windows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t w = next.fetch_add(1);
      if (w >= windows.size()) return;
      try {
        PiecewiseCurve part = restrict_curve(sys, curve, windows[w].lo, windows[w].hi);
        indices[w] = annihilator(sys, part, window_options).index;
      } catch (...) {
        failures[w] = std::current_exception();
      }
    }
  };

  const int budget = std::min<int>(parse_thread_budget(),
                                   static_cast<int>(windows.size()));
  if (budget <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < budget; ++i) pool.emplace_back(worker);
    for (std::thread& thread : pool) thread.join();
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  LocalNormalityScan scan;
  scan.windows_checked = static_cast<int>(windows.size());
  for (std::size_t w = 0; w < windows.size(); ++w) {
    if (indices[w] > 0) {
      scan.abnormal_windows.push_back({windows[w].lo, windows[w].hi, indices[w]});
    }
  }
  scan.locally_normal = scan.abnormal_windows.empty();
  return scan;
}

AbnormalityReport abnormality_index(const ControlSystem& sys,
                                    const PiecewiseCurve& curve,
                                    const AbnormalityOptions& options) {
  AbnormalityReport report;
  report.space = annihilator(sys, curve, options);
  report.index = report.space.index;
  report.normal = (report.index == 0);
  report.ordinary_implied = report.normal;
  report.gram = gram_matrix(sys, curve, 1.0, ControlMetric(), options.tolerance);
  report.gram_consistent = (report.gram.rank == sys.state_dim() - report.index);

  AbnormalityOptions arc_options = options;
  arc_options.scan_local = false;
  for (int s = 0; s < curve.arc_count(); ++s) {
    PiecewiseCurve single({curve.arc(s)}, curve.state_dim(), curve.control_dim());
    report.arc_index.push_back(annihilator(sys, single, arc_options).index);
  }
  if (options.scan_local) {
    report.scan = local_normality_scan(sys, curve, options);
  }
  return report;
}

}  // namespace varcalc
