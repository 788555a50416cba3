#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "varcalc/curve.hpp"
#include "varcalc/system.hpp"

namespace varcalc {

/// A batch problem definition as read from an INI-style file: the control
/// system plus optional extrinsic statement, reference curve, boundary value
/// data, and numeric settings. Sections and keys:
///
///   [system]    n, r, states, controls, psi, lagrangian (optional)
///   [params]    name = number, visible to every expression
///   [extrinsic] free_lagrangian, constraints
///   [curve]     t_start, t_end, q0, corner_times (optional),
///               controls (one entry per arc; lists of r expressions when
///               r > 1), grid_density (optional)
///   [solve]     t_start, t_end, q_start, q_end, corners (optional),
///               p_seed, corner_time_seeds, z_seeds (all optional)
///   [numerics]  grid_density, tolerance, admissibility_tolerance,
///               residual_tolerance, acceptance_tolerance, scan_points
///
/// Lists are bracketed and comma separated, expressions are double quoted,
/// and # starts a comment outside quotes.
struct ProblemFile {
  struct CurveSection {
    double t_start = 0.0;
    double t_end = 0.0;
    Eigen::VectorXd q0;
    std::vector<double> corner_times;
    std::vector<std::vector<std::string>> controls;  ///< per arc, r expressions
    std::optional<int> grid_density;
  };

  struct SolveSection {
    double t_start = 0.0;
    double t_end = 0.0;
    Eigen::VectorXd q_start;
    Eigen::VectorXd q_end;
    int corners = 0;
    Eigen::VectorXd p_seed;                     ///< zeros when omitted
    std::vector<double> corner_time_seeds;      ///< uniform when omitted
    std::vector<Eigen::VectorXd> z_seeds;       ///< zeros when omitted
  };

  struct NumericsSection {
    int grid_density = kDefaultGridDensity;
    double tolerance = 1e-8;                ///< rank decisions (SVD cutoff)
    double admissibility_tolerance = 1e-6;
    double residual_tolerance = 1e-8;       ///< shooting convergence
    double acceptance_tolerance = 1e-6;     ///< pass/fail for residual reports
    int scan_points = 16;
  };

  SystemSpec system;
  std::optional<ExtrinsicSpec> extrinsic;
  std::optional<CurveSection> curve;
  std::optional<SolveSection> solve;
  NumericsSection numerics;
};

/// Parses a problem definition. Errors carry the line number and the
/// offending section/key. The [system] section is mandatory.
ProblemFile parse_problem_file(std::istream& in);

/// Parses problem text held in memory (same grammar and errors).
ProblemFile parse_problem_text(const std::string& text);

/// Loads and parses a problem file from disk; IoError when unreadable.
ProblemFile load_problem_file(const std::string& path);

/// Embedded corpus problems, addressable by name. InvalidInputError for
/// unknown names.
ProblemFile builtin_problem(const std::string& name);
const std::vector<std::string>& builtin_names();
/// The raw text of an embedded problem (what builtin_problem parses).
const std::string& builtin_problem_text(const std::string& name);

/// Materializes the reference curve of the [curve] section by integrating
/// the kinetic equation under the listed control expressions.
PiecewiseCurve build_reference_curve(const ProblemFile& problem,
                                     const ControlSystem& sys);

}  // namespace varcalc
