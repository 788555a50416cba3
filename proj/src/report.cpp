#include "varcalc/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "varcalc/errors.hpp"

namespace varcalc {

namespace {

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

Json abnormality_json(const AbnormalityReport& report) {
  Json doc;
  doc["index"] = report.index;
  doc["normal"] = report.normal;
  doc["ordinary"] = report.ordinary_implied;
  doc["arc_index"] = report.arc_index;
  doc["gram"] = {
      {"rank", report.gram.rank},
      {"eigenvalues", vector_json(report.gram.eigenvalues)},
      {"consistent", report.gram_consistent},
  };
  doc["singular_values"] = vector_json(report.space.singular_values);
  doc["initial_basis"] = matrix_json(report.space.initial_basis);
  if (report.scan) {
    Json windows = Json::array();
    for (const LocalWindow& window : report.scan->abnormal_windows) {
      windows.push_back({{"t_lo", window.t_lo},
                         {"t_hi", window.t_hi},
                         {"index", window.index}});
    }
    doc["scan"] = {
        {"locally_normal", report.scan->locally_normal},
        {"windows_checked", report.scan->windows_checked},
        {"abnormal_windows", std::move(windows)},
    };
  } else {
    doc["scan"] = nullptr;
  }
  return doc;
}

Json residuals_json(const ResidualReport& residuals) {
  Json doc;
  doc["ode_q"] = residuals.ode_q;
  doc["ode_p"] = residuals.ode_p;
  doc["stationarity"] = residuals.stationarity;
  doc["corner_p"] = residuals.corner_p;
  doc["corner_h"] = residuals.corner_h;
  doc["p0_defect"] = residuals.p0_defect;
  doc["p0_evolution_defect"] = residuals.p0_evolution_defect;
  doc["hamiltonian_regularity"] = residuals.hamiltonian_regularity;
  doc["max"] = residuals.max_residual();
  return doc;
}

Json solve_json(const ShootingResult& result) {
  Json doc;
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations;
  doc["residual_norm"] = result.residual_norm;
  Json corners = Json::array();
  const PiecewiseCurve& curve = result.candidate.curve;
  for (int s = 0; s + 1 < curve.arc_count(); ++s) {
    corners.push_back(curve.arc(s).t_end);
  }
  doc["corner_times"] = std::move(corners);
  doc["residuals"] = residuals_json(result.candidate.residuals);
  doc["abnormality"] = abnormality_json(result.abnormality);
  return doc;
}

Json multipliers_json(const MultiplierPath& multipliers,
                      const CorrespondenceReport& correspondence) {
  Json doc;
  doc["residual"] = multipliers.residual;
  doc["multiplier_count"] =
      multipliers.lambda.empty() ? 0 : static_cast<int>(multipliers.lambda[0].cols());
  doc["correspondence"] = {
      {"euler_lagrange", correspondence.euler_lagrange},
      {"constraint", correspondence.constraint},
      {"momentum_match", correspondence.momentum_match},
      {"corner_momentum", correspondence.corner_momentum},
      {"corner_energy", correspondence.corner_energy},
      {"lambda_jump", correspondence.lambda_jump},
  };
  return doc;
}

bool json_numeric_equal(const Json& a, const Json& b, double tolerance) {
  if (a.is_number() && b.is_number()) {
    if (a.is_number_float() || b.is_number_float()) {
      const double x = a.get<double>();
      const double y = b.get<double>();
      if (std::isnan(x) && std::isnan(y)) return true;
      return std::abs(x - y) <=
             tolerance * std::max({1.0, std::abs(x), std::abs(y)});
    }
    return a == b;
  }
  if (a.type() != b.type()) return false;
  if (a.is_array()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!json_numeric_equal(a[i], b[i], tolerance)) return false;
    }
    return true;
  }
  if (a.is_object()) {
    if (a.size() != b.size()) return false;
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) return false;
      if (!json_numeric_equal(it.value(), b.at(it.key()), tolerance)) return false;
    }
    return true;
  }
  return a == b;
}

void write_json_file(const Json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace varcalc
