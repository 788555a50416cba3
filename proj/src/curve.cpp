#include "varcalc/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace varcalc {

namespace {

int even_step_count(double duration, int grid_density) {
  const double want = duration * grid_density;
  int m = static_cast<int>(std::ceil(want - 1e-12));
  if (m < 4) m = 4;
  if (m % 2 != 0) ++m;
  return m;
}

std::string format_csv(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace

PiecewiseCurve::PiecewiseCurve(std::vector<Arc> arcs, int state_dim,
                               int control_dim, double corner_tolerance)
    : arcs_(std::move(arcs)), n_(state_dim), r_(control_dim) {
  if (arcs_.empty()) throw InvalidInputError("curve has no arcs");
  for (std::size_t s = 0; s < arcs_.size(); ++s) {
    const Arc& arc = arcs_[s];
    const std::string where = "arc " + std::to_string(s);
    if (!(arc.t_end > arc.t_start) || arc.t_end - arc.t_start < 1e-12) {
      throw InvalidInputError(where + " is degenerate: [" +
                              format_double(arc.t_start) + ", " +
                              format_double(arc.t_end) + "]");
    }
    const int m = static_cast<int>(arc.q.rows()) - 1;
    if (m < 4 || m % 2 != 0) {
      throw InvalidInputError(where + " needs an even step count of at least 4, got " +
                              std::to_string(m));
    }
    if (arc.q.cols() != n_ || arc.z.rows() != arc.q.rows() || arc.z.cols() != r_) {
      throw InvalidInputError(where + " has inconsistent sample dimensions");
    }
  }
  for (std::size_t s = 0; s + 1 < arcs_.size(); ++s) {
    const Arc& a = arcs_[s];
    const Arc& b = arcs_[s + 1];
    if (a.t_end != b.t_start) {
      throw InvalidInputError("arc boundary times disagree between arcs " +
                              std::to_string(s) + " and " + std::to_string(s + 1));
    }
    const double gap =
        (a.q.row(a.q.rows() - 1) - b.q.row(0)).cwiseAbs().maxCoeff();
    if (gap > corner_tolerance) {
      throw InvalidInputError("states jump by " + format_double(gap) +
                              " across the corner at t=" + format_double(a.t_end) +
                              " (tolerance " + format_double(corner_tolerance) + ")");
    }
  }
}

std::vector<double> PiecewiseCurve::corner_times() const {
  std::vector<double> corners;
  for (std::size_t s = 0; s + 1 < arcs_.size(); ++s) {
    corners.push_back(arcs_[s].t_end);
  }
  return corners;
}

// ---------------------------------------------------------------------------
// Admissible integration
// ---------------------------------------------------------------------------

namespace {

using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

Eigen::VectorXd rk4_step(const Rhs& f, double t, const Eigen::VectorXd& q, double h) {
  const Eigen::VectorXd k1 = f(t, q);
  const Eigen::VectorXd k2 = f(t + h / 2, q + (h / 2) * k1);
  const Eigen::VectorXd k3 = f(t + h / 2, q + (h / 2) * k2);
  const Eigen::VectorXd k4 = f(t + h, q + h * k3);
  return q + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

Eigen::VectorXd rk4_richardson_step(const Rhs& f, double t, const Eigen::VectorXd& q,
                                    double h) {
  const Eigen::VectorXd full = rk4_step(f, t, q, h);
  const Eigen::VectorXd mid = rk4_step(f, t, q, h / 2);
  const Eigen::VectorXd half = rk4_step(f, t + h / 2, mid, h / 2);
  return half + (half - full) / 15.0;
}

}  // namespace

PiecewiseCurve integrate_admissible(const ControlSystem& sys,
                                    const Eigen::VectorXd& q0, double t0,
                                    double t1,
                                    const std::vector<double>& corner_times,
                                    const ZProvider& controls, int grid_density) {
  if (!(t1 > t0)) throw InvalidInputError("time window is empty");
  if (grid_density < 1) throw InvalidInputError("grid density must be positive");
  for (std::size_t s = 0; s < corner_times.size(); ++s) {
    const double a = corner_times[s];
    if (!(a > t0) || !(a < t1)) {
      throw InvalidInputError("corner time " + format_double(a) +
                              " is outside the open time window");
    }
    if (s > 0 && !(a > corner_times[s - 1])) {
      throw InvalidInputError("corner times must be strictly increasing");
    }
  }

  std::vector<double> bounds;
  bounds.push_back(t0);
  bounds.insert(bounds.end(), corner_times.begin(), corner_times.end());
  bounds.push_back(t1);

  const int n = sys.state_dim();
  const int r = sys.control_dim();
  std::vector<Arc> arcs;
  Eigen::VectorXd q = q0;

  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const int arc_index = static_cast<int>(s);
    Arc arc;
    arc.t_start = bounds[s];
    arc.t_end = bounds[s + 1];
    const double duration = arc.t_end - arc.t_start;
    const int m = even_step_count(duration, grid_density);
    arc.q.resize(m + 1, n);
    arc.z.resize(m + 1, r);

    Rhs rhs = [&](double t, const Eigen::VectorXd& state) {
      return sys.psi_value(t, state, controls(arc_index, t));
    };

    arc.q.row(0) = q.transpose();
    arc.z.row(0) = controls(arc_index, arc.t_start).transpose();
    for (int k = 0; k < m; ++k) {
      const double tk = arc.time_at(k);
      const double tk1 = arc.time_at(k + 1);
      q = rk4_richardson_step(rhs, tk, q, tk1 - tk);
      arc.q.row(k + 1) = q.transpose();
      arc.z.row(k + 1) = controls(arc_index, tk1).transpose();
    }
    arcs.push_back(std::move(arc));
  }
  return PiecewiseCurve(std::move(arcs), n, r, 1e-10);
}

// ---------------------------------------------------------------------------
// Grid numerics
// ---------------------------------------------------------------------------

Eigen::MatrixXd grid_time_derivative(const Eigen::MatrixXd& samples, double h) {
  const int m = static_cast<int>(samples.rows()) - 1;
  if (m < 4) throw InvalidInputError("derivative stencils need at least 5 samples");
  Eigen::MatrixXd d(samples.rows(), samples.cols());
  const double w = 1.0 / (12.0 * h);
  d.row(0) = w * (-25.0 * samples.row(0) + 48.0 * samples.row(1) -
                  36.0 * samples.row(2) + 16.0 * samples.row(3) - 3.0 * samples.row(4));
  d.row(1) = w * (-3.0 * samples.row(0) - 10.0 * samples.row(1) +
                  18.0 * samples.row(2) - 6.0 * samples.row(3) + samples.row(4));
  for (int k = 2; k <= m - 2; ++k) {
    d.row(k) = w * (samples.row(k - 2) - 8.0 * samples.row(k - 1) +
                    8.0 * samples.row(k + 1) - samples.row(k + 2));
  }
  d.row(m - 1) = w * (3.0 * samples.row(m) + 10.0 * samples.row(m - 1) -
                      18.0 * samples.row(m - 2) + 6.0 * samples.row(m - 3) -
                      samples.row(m - 4));
  d.row(m) = w * (25.0 * samples.row(m) - 48.0 * samples.row(m - 1) +
                  36.0 * samples.row(m - 2) - 16.0 * samples.row(m - 3) +
                  3.0 * samples.row(m - 4));
  return d;
}

double simpson_integral(const Eigen::VectorXd& samples, double h) {
  const int m = static_cast<int>(samples.size()) - 1;
  if (m < 2 || m % 2 != 0) {
    throw InvalidInputError("Simpson integration needs an even interval count");
  }
  double odd = 0.0, even = 0.0;
  for (int k = 1; k < m; k += 2) odd += samples[k];
  for (int k = 2; k < m; k += 2) even += samples[k];
  return (h / 3.0) * (samples[0] + samples[m] + 4.0 * odd + 2.0 * even);
}

Eigen::MatrixXd cumulative_integral(const Eigen::MatrixXd& samples, double h) {
  const int m = static_cast<int>(samples.rows()) - 1;
  if (m < 3) throw InvalidInputError("cumulative integration needs at least 4 samples");
  Eigen::MatrixXd out(samples.rows(), samples.cols());
  out.row(0).setZero();
  // Even prefixes accumulate Simpson panels; odd ones close with a cubic
  // startup rule (k = 1) or a trailing 3/8 panel (k >= 3).
  for (int k = 2; k <= m; k += 2) {
    out.row(k) = out.row(k - 2) +
                 (h / 3.0) * (samples.row(k - 2) + 4.0 * samples.row(k - 1) +
                              samples.row(k));
  }
  out.row(1) = (h / 24.0) * (9.0 * samples.row(0) + 19.0 * samples.row(1) -
                             5.0 * samples.row(2) + samples.row(3));
  for (int k = 3; k <= m; k += 2) {
    out.row(k) = out.row(k - 3) +
                 (3.0 * h / 8.0) * (samples.row(k - 3) + 3.0 * samples.row(k - 2) +
                                    3.0 * samples.row(k - 1) + samples.row(k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Curve diagnostics
// ---------------------------------------------------------------------------

double admissibility_residual(const ControlSystem& sys, const PiecewiseCurve& curve) {
  double worst = 0.0;
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    const Eigen::MatrixXd dq = grid_time_derivative(arc.q, arc.step());
    for (int k = 0; k <= arc.steps(); ++k) {
      const Eigen::VectorXd psi =
          sys.psi_value(arc.time_at(k), arc.q.row(k).transpose(), arc.z.row(k).transpose());
      const double defect = (dq.row(k).transpose() - psi).cwiseAbs().maxCoeff();
      worst = std::max(worst, defect);
    }
  }
  return worst;
}

std::vector<Eigen::VectorXd> corner_jumps(const ControlSystem& sys,
                                          const PiecewiseCurve& curve) {
  std::vector<Eigen::VectorXd> jumps;
  for (int s = 0; s + 1 < curve.arc_count(); ++s) {
    const Arc& pre = curve.arc(s);
    const Arc& post = curve.arc(s + 1);
    const double a = pre.t_end;
    const Eigen::VectorXd before =
        sys.psi_value(a, pre.q.row(pre.steps()).transpose(), pre.z.row(pre.steps()).transpose());
    const Eigen::VectorXd after =
        sys.psi_value(a, post.q.row(0).transpose(), post.z.row(0).transpose());
    jumps.push_back(after - before);
  }
  return jumps;
}

void check_rank_along(const ControlSystem& sys, const PiecewiseCurve& curve,
                      double rank_tolerance) {
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    for (int k = 0; k <= arc.steps(); ++k) {
      sys.check_rank(arc.time_at(k), arc.q.row(k).transpose(),
                     arc.z.row(k).transpose(), rank_tolerance);
    }
  }
}

// ---------------------------------------------------------------------------
// Sampling and restriction
// ---------------------------------------------------------------------------

CurveSampler::CurveSampler(const ControlSystem& sys, const PiecewiseCurve& curve)
    : curve_(curve) {
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    Eigen::MatrixXd qs(arc.q.rows(), arc.q.cols());
    for (int k = 0; k <= arc.steps(); ++k) {
      qs.row(k) = sys.psi_value(arc.time_at(k), arc.q.row(k).transpose(),
                                arc.z.row(k).transpose())
                      .transpose();
    }
    q_slopes_.push_back(std::move(qs));
    z_slopes_.push_back(grid_time_derivative(arc.z, arc.step()));
  }
}

Eigen::VectorXd CurveSampler::hermite(const Eigen::MatrixXd& values,
                                      const Eigen::MatrixXd& slopes,
                                      const Arc& arc, double t) const {
  const double h = arc.step();
  int k = static_cast<int>(std::floor((t - arc.t_start) / h));
  k = std::clamp(k, 0, arc.steps() - 1);
  const double s = (t - arc.time_at(k)) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return (h00 * values.row(k) + h10 * h * slopes.row(k) +
          h01 * values.row(k + 1) + h11 * h * slopes.row(k + 1))
      .transpose();
}

Eigen::VectorXd CurveSampler::q_at(int arc_index, double t) const {
  const Arc& arc = curve_.arc(arc_index);
  return hermite(arc.q, q_slopes_[static_cast<std::size_t>(arc_index)], arc, t);
}

Eigen::VectorXd CurveSampler::z_at(int arc_index, double t) const {
  const Arc& arc = curve_.arc(arc_index);
  return hermite(arc.z, z_slopes_[static_cast<std::size_t>(arc_index)], arc, t);
}

PiecewiseCurve restrict_curve(const ControlSystem& sys, const PiecewiseCurve& curve,
                              double new_t0, double new_t1) {
  const double span = curve.t_end() - curve.t_start();
  const double slack = 1e-9 * span;
  if (new_t0 < curve.t_start() - slack || new_t1 > curve.t_end() + slack ||
      !(new_t1 > new_t0)) {
    throw InvalidInputError("restriction window [" + format_double(new_t0) + ", " +
                            format_double(new_t1) + "] is not inside the curve");
  }
  new_t0 = std::max(new_t0, curve.t_start());
  new_t1 = std::min(new_t1, curve.t_end());

  int total_steps = 0;
  for (int s = 0; s < curve.arc_count(); ++s) total_steps += curve.arc(s).steps();
  const double density = total_steps / span;

  std::vector<double> bounds;
  bounds.push_back(new_t0);
  for (double a : curve.corner_times()) {
    if (a > new_t0 + 1e-12 && a < new_t1 - 1e-12) bounds.push_back(a);
  }
  bounds.push_back(new_t1);

  CurveSampler sampler(sys, curve);
  std::vector<Arc> arcs;
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    Arc arc;
    arc.t_start = bounds[s];
    arc.t_end = bounds[s + 1];
    const double mid = 0.5 * (arc.t_start + arc.t_end);
    int src = 0;
    for (int i = 0; i < curve.arc_count(); ++i) {
      if (mid >= curve.arc(i).t_start && mid <= curve.arc(i).t_end) {
        src = i;
        break;
      }
    }
    int m = even_step_count(arc.t_end - arc.t_start,
                            static_cast<int>(std::ceil(density)));
    if (m < 8) m = 8;
    arc.q.resize(m + 1, curve.state_dim());
    arc.z.resize(m + 1, curve.control_dim());
    for (int k = 0; k <= m; ++k) {
      const double tk = arc.time_at(k);
      arc.q.row(k) = sampler.q_at(src, tk).transpose();
      arc.z.row(k) = sampler.z_at(src, tk).transpose();
    }
    arcs.push_back(std::move(arc));
  }
  return PiecewiseCurve(std::move(arcs), curve.state_dim(), curve.control_dim(), 1e-8);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

void write_csv_impl(std::ostream& out, const PiecewiseCurve& curve,
                    const std::vector<Eigen::VectorXd>* p0,
                    const std::vector<Eigen::MatrixXd>* p) {
  const int n = curve.state_dim();
  const int r = curve.control_dim();
  out << "t,arc";
  for (int i = 1; i <= n; ++i) out << ",q" << i;
  for (int a = 1; a <= r; ++a) out << ",z" << a;
  if (p0) {
    out << ",p0";
    for (int i = 1; i <= n; ++i) out << ",p" << i;
  }
  out << "\n";
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    for (int k = 0; k <= arc.steps(); ++k) {
      out << format_csv(arc.time_at(k)) << ',' << s;
      for (int i = 0; i < n; ++i) out << ',' << format_csv(arc.q(k, i));
      for (int a = 0; a < r; ++a) out << ',' << format_csv(arc.z(k, a));
      if (p0) {
        out << ',' << format_csv((*p0)[static_cast<std::size_t>(s)][k]);
        for (int i = 0; i < n; ++i) {
          out << ',' << format_csv((*p)[static_cast<std::size_t>(s)](k, i));
        }
      }
      out << "\n";
    }
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_csv_double(const std::string& field, int line_no) {
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0') {
    throw InvalidInputError("csv line " + std::to_string(line_no) +
                            ": bad numeric field '" + field + "'");
  }
  return value;
}

}  // namespace

void write_curve_csv(std::ostream& out, const PiecewiseCurve& curve) {
  write_csv_impl(out, curve, nullptr, nullptr);
}

void write_curve_csv(std::ostream& out, const PiecewiseCurve& curve,
                     const std::vector<Eigen::VectorXd>& p0,
                     const std::vector<Eigen::MatrixXd>& p) {
  if (static_cast<int>(p0.size()) != curve.arc_count() ||
      static_cast<int>(p.size()) != curve.arc_count()) {
    throw InvalidInputError("momentum data does not match the arc count");
  }
  write_csv_impl(out, curve, &p0, &p);
}

CurveCsvData read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInputError("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "t" || header[1] != "arc") {
    throw InvalidInputError("csv: header must start with t,arc");
  }
  int n = 0, r = 0;
  std::size_t pos = 2;
  while (pos < header.size() && header[pos] == "q" + std::to_string(n + 1)) {
    ++n;
    ++pos;
  }
  while (pos < header.size() && header[pos] == "z" + std::to_string(r + 1)) {
    ++r;
    ++pos;
  }
  bool has_momenta = false;
  if (pos < header.size() && header[pos] == "p0") {
    has_momenta = true;
    ++pos;
    for (int i = 1; i <= n; ++i, ++pos) {
      if (pos >= header.size() || header[pos] != "p" + std::to_string(i)) {
        throw InvalidInputError("csv: momentum columns must be p0,p1..pn");
      }
    }
  }
  if (n < 1 || r < 1 || pos != header.size()) {
    throw InvalidInputError("csv: header columns must be t,arc,q1..qn,z1..zr[,p0,p1..pn]");
  }

  struct Row {
    double t;
    int arc;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw InvalidInputError("csv line " + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields, got " +
                              std::to_string(fields.size()));
    }
    Row row;
    row.t = parse_csv_double(fields[0], line_no);
    row.arc = static_cast<int>(parse_csv_double(fields[1], line_no));
    for (std::size_t i = 2; i < fields.size(); ++i) {
      row.values.push_back(parse_csv_double(fields[i], line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInputError("csv: no data rows");

  std::vector<Arc> arcs;
  std::vector<Eigen::VectorXd> p0;
  std::vector<Eigen::MatrixXd> p;
  std::size_t i = 0;
  int expected_arc = 0;
  while (i < rows.size()) {
    if (rows[i].arc != expected_arc) {
      throw InvalidInputError("csv: arc indices must run 0,1,... without gaps");
    }
    std::size_t j = i;
    while (j < rows.size() && rows[j].arc == expected_arc) ++j;
    const int m = static_cast<int>(j - i) - 1;
    if (m < 1) throw InvalidInputError("csv: arc " + std::to_string(expected_arc) +
                                       " has too few rows");
    Arc arc;
    arc.t_start = rows[i].t;
    arc.t_end = rows[j - 1].t;
    const double duration = arc.t_end - arc.t_start;
    arc.q.resize(m + 1, n);
    arc.z.resize(m + 1, r);
    Eigen::VectorXd arc_p0(m + 1);
    Eigen::MatrixXd arc_p(m + 1, n);
    for (int k = 0; k <= m; ++k) {
      const Row& row = rows[i + static_cast<std::size_t>(k)];
      const double expected_t = arc.t_start + duration * (static_cast<double>(k) / m);
      if (std::abs(row.t - expected_t) > 1e-9 * std::max(duration, 1e-12)) {
        throw InvalidInputError("csv: arc " + std::to_string(expected_arc) +
                                " is not uniformly gridded near t=" + format_double(row.t));
      }
      for (int c = 0; c < n; ++c) arc.q(k, c) = row.values[static_cast<std::size_t>(c)];
      for (int c = 0; c < r; ++c) arc.z(k, c) = row.values[static_cast<std::size_t>(n + c)];
      if (has_momenta) {
        arc_p0[k] = row.values[static_cast<std::size_t>(n + r)];
        for (int c = 0; c < n; ++c) {
          arc_p(k, c) = row.values[static_cast<std::size_t>(n + r + 1 + c)];
        }
      }
    }
    arcs.push_back(std::move(arc));
    if (has_momenta) {
      p0.push_back(std::move(arc_p0));
      p.push_back(std::move(arc_p));
    }
    ++expected_arc;
    i = j;
  }

  CurveCsvData data{PiecewiseCurve(std::move(arcs), n, r, 1e-8), has_momenta,
                    std::move(p0), std::move(p)};
  return data;
}

}  // namespace varcalc
