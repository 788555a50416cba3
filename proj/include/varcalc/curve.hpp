#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <vector>

#include "varcalc/system.hpp"

namespace varcalc {

/// Default number of integration steps per unit of time.
inline constexpr int kDefaultGridDensity = 400;

/// One smooth arc of a piecewise evolution, sampled on a uniform grid.
/// q has M+1 rows of n states, z has M+1 rows of r controls, with M even
/// and at least 4.
struct Arc {
  double t_start = 0.0;
  double t_end = 0.0;
  Eigen::MatrixXd q;
  Eigen::MatrixXd z;

  int steps() const noexcept { return static_cast<int>(q.rows()) - 1; }
  double step() const noexcept { return (t_end - t_start) / steps(); }
  double time_at(int k) const noexcept {
    return t_start + (t_end - t_start) * (static_cast<double>(k) / steps());
  }
};

/// A piecewise smooth evolution: arcs chained in time, states continuous
/// across corners, controls free to jump there.
class PiecewiseCurve {
 public:
  /// Validates and adopts the arcs. Each arc needs an even step count of at
  /// least 4 and a duration above 1e-12; consecutive arcs must share their
  /// boundary time exactly and match states within `corner_tolerance`.
  PiecewiseCurve(std::vector<Arc> arcs, int state_dim, int control_dim,
                 double corner_tolerance = 1e-8);

  int arc_count() const noexcept { return static_cast<int>(arcs_.size()); }
  int state_dim() const noexcept { return n_; }
  int control_dim() const noexcept { return r_; }
  const Arc& arc(int s) const { return arcs_[static_cast<std::size_t>(s)]; }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }

  double t_start() const noexcept { return arcs_.front().t_start; }
  double t_end() const noexcept { return arcs_.back().t_end; }
  /// Interior corner times a_1 < ... < a_{N-1}.
  std::vector<double> corner_times() const;

  Eigen::VectorXd q_start() const { return arcs_.front().q.row(0); }
  Eigen::VectorXd q_end() const { return arcs_.back().q.row(arcs_.back().steps()); }

 private:
  std::vector<Arc> arcs_;
  int n_ = 0;
  int r_ = 0;
};

/// Control law used when integrating an admissible curve: maps (arc index,
/// time) to the control vector.
using ZProvider = std::function<Eigen::VectorXd(int arc_index, double t)>;

/// Integrates dq/dt = psi(t, q, z(t)) from q0 over [t0, t1] with the given
/// interior corner times, producing one arc per corner interval. Each RK4
/// step is extrapolated against two half steps (Richardson), so stored grid
/// values are accurate to fifth order locally. `grid_density` is the number
/// of steps per unit time; every arc gets an even step count of at least 4.
PiecewiseCurve integrate_admissible(const ControlSystem& sys,
                                    const Eigen::VectorXd& q0, double t0,
                                    double t1,
                                    const std::vector<double>& corner_times,
                                    const ZProvider& controls,
                                    int grid_density = kDefaultGridDensity);

/// Largest admissibility defect max_k |dq/dt(t_k) - psi(t_k, q_k, z_k)|_inf
/// over all grid points of all arcs, with dq/dt from fourth order finite
/// difference stencils on the stored grid.
double admissibility_residual(const ControlSystem& sys, const PiecewiseCurve& curve);

/// Kinetic jumps psi(a_s^+) - psi(a_s^-) at the interior corners.
std::vector<Eigen::VectorXd> corner_jumps(const ControlSystem& sys,
                                          const PiecewiseCurve& curve);

/// Verifies the control distribution has full rank at every grid point.
void check_rank_along(const ControlSystem& sys, const PiecewiseCurve& curve,
                      double rank_tolerance = 1e-9);

/// Cubic Hermite interpolation of a stored curve. State slopes come from the
/// kinetic expressions (exact for admissible curves), control slopes from
/// fourth order stencils. Evaluation outside an arc extrapolates the
/// boundary polynomial; the sampler must not outlive curve or system.
class CurveSampler {
 public:
  CurveSampler(const ControlSystem& sys, const PiecewiseCurve& curve);

  Eigen::VectorXd q_at(int arc_index, double t) const;
  Eigen::VectorXd z_at(int arc_index, double t) const;

 private:
  Eigen::VectorXd hermite(const Eigen::MatrixXd& values,
                          const Eigen::MatrixXd& slopes, const Arc& arc,
                          double t) const;

  const PiecewiseCurve& curve_;
  std::vector<Eigen::MatrixXd> q_slopes_;
  std::vector<Eigen::MatrixXd> z_slopes_;
};

/// Restriction of a curve to [new_t0, new_t1], resampled by Hermite
/// interpolation at the source grid density (never below 8 steps per arc).
/// Source corners strictly inside the window stay corners.
PiecewiseCurve restrict_curve(const ControlSystem& sys, const PiecewiseCurve& curve,
                              double new_t0, double new_t1);

/// Fourth order time derivative of uniformly gridded samples (one sample per
/// row, spacing h). Uses centered stencils inside and one-sided stencils of
/// the same order at the ends; needs at least 5 rows.
Eigen::MatrixXd grid_time_derivative(const Eigen::MatrixXd& samples, double h);

/// Composite Simpson integral of samples at spacing h (even interval count).
double simpson_integral(const Eigen::VectorXd& samples, double h);

/// Cumulative integral at every grid node, fourth order accurate: composite
/// Simpson for even prefixes, with a 3/8 (or cubic startup) tail for odd
/// ones. Row k of the result integrates rows 0..k.
Eigen::MatrixXd cumulative_integral(const Eigen::MatrixXd& samples, double h);

/// Writes the curve in CSV form: header t,arc,q1..qn,z1..zr, one row per
/// grid node, arc indices zero based, corner nodes appearing once per
/// adjacent arc. Values are printed with %.17g.
void write_curve_csv(std::ostream& out, const PiecewiseCurve& curve);

/// CSV variant with momenta attached: extra columns p0,p1..pn.
void write_curve_csv(std::ostream& out, const PiecewiseCurve& curve,
                     const std::vector<Eigen::VectorXd>& p0,
                     const std::vector<Eigen::MatrixXd>& p);

/// Curve (and optional momenta) recovered from CSV text.
struct CurveCsvData {
  PiecewiseCurve curve;
  bool has_momenta = false;
  std::vector<Eigen::VectorXd> p0;  // per arc, M+1
  std::vector<Eigen::MatrixXd> p;   // per arc, (M+1) x n
};

/// Parses CSV written by write_curve_csv (or produced externally in the same
/// layout). Dimensions are taken from the header. Grid uniformity within
/// each arc is checked to 1e-9 of the arc duration.
CurveCsvData read_curve_csv(std::istream& in);

}  // namespace varcalc
