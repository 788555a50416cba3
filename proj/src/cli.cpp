#include "varcalc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "varcalc/abnormality.hpp"
#include "varcalc/curve.hpp"
#include "varcalc/errors.hpp"
#include "varcalc/extremal.hpp"
#include "varcalc/multipliers.hpp"
#include "varcalc/problem.hpp"
#include "varcalc/report.hpp"
#include "varcalc/system.hpp"

namespace varcalc {

namespace {

constexpr int kExitPass = 0;
constexpr int kExitNegative = 1;
constexpr int kExitInput = 2;

/// Human tables use 6 significant digits; machine artifacts keep full
/// precision (CSV at %.17g, JSON at shortest round-trip).
std::string fmt6(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string fmt17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

struct CliOptions {
  std::string file;
  std::string builtin;
  std::string json_path;
  std::string csv_path;
  std::string candidate_path;
  std::string gauge;
  double tol = 0.0;
  bool tol_set = false;
  bool scan_local = false;
};

struct Loaded {
  ProblemFile problem;
  std::string name;
};

Loaded load_problem(const CliOptions& options) {
  if (!options.builtin.empty()) {
    return {builtin_problem(options.builtin), options.builtin};
  }
  if (!options.file.empty()) {
    return {load_problem_file(options.file), options.file};
  }
  throw InvalidInputError("no problem given: pass a problem file or --builtin NAME");
}

void write_report(const Json& doc, const std::string& path) {
  if (!path.empty()) write_json_file(doc, path);
}

std::string index_phrase(const AbnormalityReport& report) {
  return "index " + std::to_string(report.index) +
         (report.normal ? " (normal)" : " (abnormal)");
}

void print_residual_table(std::ostream& out, const ResidualReport& r) {
  out << "residuals:\n";
  out << "  ode_q                   " << fmt6(r.ode_q) << "\n";
  out << "  ode_p                   " << fmt6(r.ode_p) << "\n";
  out << "  stationarity            " << fmt6(r.stationarity) << "\n";
  out << "  corner_p                " << fmt6(r.corner_p) << "\n";
  out << "  corner_h                " << fmt6(r.corner_h) << "\n";
  out << "  p0_defect               " << fmt6(r.p0_defect) << "\n";
  out << "  p0_evolution_defect     " << fmt6(r.p0_evolution_defect) << "\n";
  out << "  hamiltonian_regularity  " << fmt6(r.hamiltonian_regularity) << "\n";
  out << "  max                     " << fmt6(r.max_residual()) << "\n";
}

void print_verdict(std::ostream& out, bool pass) {
  out << "result: " << (pass ? "PASS" : "FAIL") << "\n";
}

/// Candidate read back from a CSV written by cmd_solve (momenta required).
ExtremalCandidate candidate_from_csv(const ControlSystem& sys,
                                     const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open candidate csv " + path);
  CurveCsvData data = read_curve_csv(in);
  if (!data.has_momenta) {
    throw InvalidInputError("candidate csv " + path +
                            " lacks the momentum columns p0,p1..pn");
  }
  if (data.curve.state_dim() != sys.state_dim() ||
      data.curve.control_dim() != sys.control_dim()) {
    throw InvalidInputError(
        "candidate csv dimensions (" + std::to_string(data.curve.state_dim()) +
        " states, " + std::to_string(data.curve.control_dim()) +
        " controls) do not match the problem (" +
        std::to_string(sys.state_dim()) + ", " +
        std::to_string(sys.control_dim()) + ")");
  }
  CovectorPath momenta;
  momenta.p = std::move(data.p);
  momenta.p0 = std::move(data.p0);
  ResidualReport residuals = extremal_residuals(sys, data.curve, momenta);
  return ExtremalCandidate{std::move(data.curve), std::move(momenta), residuals};
}

ShootingResult solve_boundary_problem(const Loaded& loaded,
                                      const ControlSystem& sys,
                                      std::ostream* trace) {
  if (!loaded.problem.solve) {
    throw InvalidInputError("this command needs a [solve] section");
  }
  const ProblemFile::SolveSection& solve = *loaded.problem.solve;
  ShootingSeeds seeds;
  seeds.p_start = solve.p_seed;
  seeds.corner_times = solve.corner_time_seeds;
  seeds.z_branches = solve.z_seeds;

  ShootingOptions options;
  options.grid_density = loaded.problem.numerics.grid_density;
  options.residual_tolerance = loaded.problem.numerics.residual_tolerance;
  if (trace) {
    options.on_iterate = [trace](int iteration, double residual) {
      *trace << "iter " << iteration << "  residual " << fmt6(residual) << "\n";
    };
  }
  return shoot_extremal(sys, solve.q_start, solve.q_end, solve.t_start,
                        solve.t_end, seeds, options);
}

/// Candidate for the verification-style commands: an explicit CSV wins,
/// otherwise the [solve] section is solved silently.
ExtremalCandidate obtain_candidate(const Loaded& loaded, const ControlSystem& sys,
                                   const CliOptions& options, std::ostream& out) {
  if (!options.candidate_path.empty()) {
    return candidate_from_csv(sys, options.candidate_path);
  }
  ShootingResult result = solve_boundary_problem(loaded, sys, nullptr);
  if (!result.converged) {
    out << "candidate solve stalled at residual " << fmt6(result.residual_norm)
        << "\n";
    throw NoConvergenceError("could not produce a candidate from the [solve] section");
  }
  return std::move(result.candidate);
}

int cmd_check(const Loaded& loaded, const CliOptions& options, std::ostream& out) {
  ControlSystem sys(loaded.problem.system);
  PiecewiseCurve curve = build_reference_curve(loaded.problem, sys);
  const double tolerance =
      options.tol_set ? options.tol
                      : loaded.problem.numerics.admissibility_tolerance;

  const double residual = admissibility_residual(sys, curve);
  out << "problem: " << loaded.name << "\n";
  out << "states " << sys.state_dim() << ", controls " << sys.control_dim()
      << ", arcs " << curve.arc_count() << "\n";
  out << "admissibility residual: " << fmt6(residual) << " (tolerance "
      << fmt6(tolerance) << ")\n";

  bool rank_ok = true;
  std::string rank_message;
  int nodes = 0;
  for (int s = 0; s < curve.arc_count() && rank_ok; ++s) {
    const Arc& arc = curve.arc(s);
    for (int k = 0; k <= arc.steps(); ++k) {
      ++nodes;
      try {
        sys.check_rank(arc.time_at(k), arc.q.row(k), arc.z.row(k));
      } catch (const RankDeficiencyError& e) {
        rank_ok = false;
        rank_message = e.what();
        break;
      }
    }
  }
  if (rank_ok) {
    out << "control rank: full (" << sys.control_dim() << ") at all " << nodes
        << " nodes\n";
  } else {
    out << "control rank: DEFICIENT: " << rank_message << "\n";
  }

  const std::vector<Eigen::VectorXd> jumps = corner_jumps(sys, curve);
  if (jumps.empty()) {
    out << "corners: none\n";
  } else {
    out << "corners:\n";
    for (std::size_t s = 0; s < jumps.size(); ++s) {
      out << "  " << (s + 1) << " at t = "
          << fmt6(curve.arc(static_cast<int>(s)).t_end) << ": [psi] = (";
      for (Eigen::Index i = 0; i < jumps[s].size(); ++i) {
        if (i) out << ", ";
        out << fmt6(jumps[s][i]);
      }
      out << "), |[psi]| = " << fmt6(jumps[s].norm()) << "\n";
    }
  }

  const bool pass = residual <= tolerance;
  print_verdict(out, pass);

  Json doc;
  doc["command"] = "check";
  doc["problem"] = loaded.name;
  doc["state_dim"] = sys.state_dim();
  doc["control_dim"] = sys.control_dim();
  doc["arcs"] = curve.arc_count();
  doc["residual"] = residual;
  doc["tolerance"] = tolerance;
  doc["rank_ok"] = rank_ok;
  Json corner_docs = Json::array();
  for (std::size_t s = 0; s < jumps.size(); ++s) {
    Json jump = Json::array();
    for (Eigen::Index i = 0; i < jumps[s].size(); ++i) jump.push_back(jumps[s][i]);
    corner_docs.push_back({{"time", curve.arc(static_cast<int>(s)).t_end},
                           {"jump", std::move(jump)},
                           {"magnitude", jumps[s].norm()}});
  }
  doc["corners"] = std::move(corner_docs);
  doc["pass"] = pass;
  write_report(doc, options.json_path);

  return pass ? kExitPass : kExitNegative;
}

int cmd_abnormality(const Loaded& loaded, const CliOptions& options,
                    std::ostream& out) {
  ControlSystem sys(loaded.problem.system);
  PiecewiseCurve curve = build_reference_curve(loaded.problem, sys);

  AbnormalityOptions abn;
  abn.tolerance =
      options.tol_set ? options.tol : loaded.problem.numerics.tolerance;
  abn.admissibility_tolerance = loaded.problem.numerics.admissibility_tolerance;
  abn.scan_local = options.scan_local;
  abn.scan_points = loaded.problem.numerics.scan_points;

  const AbnormalityReport report = abnormality_index(sys, curve, abn);

  out << "problem: " << loaded.name << "\n";
  out << index_phrase(report) << "\n";
  out << "per-arc index: [";
  for (std::size_t s = 0; s < report.arc_index.size(); ++s) {
    if (s) out << ", ";
    out << report.arc_index[s];
  }
  out << "]\n";
  out << "gram rank " << report.gram.rank << " of " << sys.state_dim() << " ("
      << (report.gram_consistent ? "consistent" : "INCONSISTENT") << ")\n";
  out << "singular values:";
  for (Eigen::Index i = 0; i < report.space.singular_values.size(); ++i) {
    out << " " << fmt6(report.space.singular_values[i]);
  }
  out << "\n";

  bool locally_ok = true;
  if (report.scan) {
    if (report.scan->locally_normal) {
      out << "locally normal: all " << report.scan->windows_checked
          << " windows have index 0\n";
    } else {
      locally_ok = false;
      // Headline the widest abnormal window between distinguished times
      // (curve ends, corners, t = 0); fall back to the widest overall.
      std::vector<double> marks = {curve.t_start(), curve.t_end()};
      for (int s = 0; s + 1 < curve.arc_count(); ++s) {
        marks.push_back(curve.arc(s).t_end);
      }
      if (curve.t_start() < 0.0 && curve.t_end() > 0.0) marks.push_back(0.0);
      const double snap = 1e-9 * (curve.t_end() - curve.t_start());
      const auto distinguished = [&marks, snap](double t) {
        return std::any_of(marks.begin(), marks.end(),
                           [t, snap](double m) { return std::abs(t - m) <= snap; });
      };
      const LocalWindow* headline = nullptr;
      bool headline_marked = false;
      for (const LocalWindow& window : report.scan->abnormal_windows) {
        const bool marked = distinguished(window.t_lo) && distinguished(window.t_hi);
        if (!headline || (marked && !headline_marked) ||
            (marked == headline_marked &&
             window.t_hi - window.t_lo > headline->t_hi - headline->t_lo)) {
          headline = &window;
          headline_marked = marked;
        }
      }
      out << "NOT locally normal: [" << fmt6(headline->t_lo) << ", "
          << fmt6(headline->t_hi) << "] has index " << headline->index << " ("
          << report.scan->abnormal_windows.size() << " abnormal of "
          << report.scan->windows_checked << " windows)\n";
    }
  }

  const bool pass = report.normal && locally_ok;
  print_verdict(out, pass);

  Json doc;
  doc["command"] = "abnormality";
  doc["problem"] = loaded.name;
  doc["tolerance"] = abn.tolerance;
  doc.update(abnormality_json(report));
  doc["pass"] = pass;
  write_report(doc, options.json_path);

  return pass ? kExitPass : kExitNegative;
}

int cmd_solve(const Loaded& loaded, const CliOptions& options, std::ostream& out) {
  ControlSystem sys(loaded.problem.system);
  out << "problem: " << loaded.name << "\n";
  const ShootingResult result = solve_boundary_problem(loaded, sys, &out);

  if (result.converged) {
    out << "converged in " << result.iterations << " iterations, residual "
        << fmt6(result.residual_norm) << "\n";
  } else {
    out << "no ℘(γ) certificate found: the boundary value iteration "
           "stalled after "
        << result.iterations << " iterations at residual "
        << fmt6(result.residual_norm) << "\n";
  }

  const PiecewiseCurve& curve = result.candidate.curve;
  if (curve.arc_count() > 1) {
    out << "corner times:";
    for (int s = 0; s + 1 < curve.arc_count(); ++s) {
      out << " " << fmt6(curve.arc(s).t_end);
    }
    out << "\n";
  }
  out << index_phrase(result.abnormality) << "\n";
  print_residual_table(out, result.candidate.residuals);

  const double tolerance = options.tol_set
                               ? options.tol
                               : loaded.problem.numerics.acceptance_tolerance;
  const bool pass =
      result.converged &&
      result.candidate.residuals.max_residual() <= tolerance;
  print_verdict(out, pass);

  // Artifacts are written even for the best non-converged iterate.
  if (!options.csv_path.empty()) {
    std::ofstream csv(options.csv_path);
    if (!csv) throw IoError("cannot open " + options.csv_path + " for writing");
    write_curve_csv(csv, curve, result.candidate.momenta.p0,
                    result.candidate.momenta.p);
  }
  Json doc;
  doc["command"] = "solve";
  doc["problem"] = loaded.name;
  doc["tolerance"] = tolerance;
  doc.update(solve_json(result));
  doc["pass"] = pass;
  write_report(doc, options.json_path);

  return pass ? kExitPass : kExitNegative;
}

int cmd_verify(const Loaded& loaded, const CliOptions& options, std::ostream& out) {
  if (options.candidate_path.empty()) {
    throw InvalidInputError("verify needs --candidate CSV");
  }
  ControlSystem sys(loaded.problem.system);
  const ExtremalCandidate candidate =
      candidate_from_csv(sys, options.candidate_path);

  const double tolerance = options.tol_set
                               ? options.tol
                               : loaded.problem.numerics.acceptance_tolerance;
  out << "problem: " << loaded.name << "\n";
  out << "candidate: " << options.candidate_path << " ("
      << candidate.curve.arc_count() << " arcs)\n";
  print_residual_table(out, candidate.residuals);
  const bool pass = candidate.residuals.max_residual() <= tolerance;
  out << "tolerance: " << fmt6(tolerance) << "\n";
  print_verdict(out, pass);

  Json doc;
  doc["command"] = "verify";
  doc["problem"] = loaded.name;
  doc["candidate"] = options.candidate_path;
  doc["tolerance"] = tolerance;
  doc["residuals"] = residuals_json(candidate.residuals);
  doc["pass"] = pass;
  write_report(doc, options.json_path);

  return pass ? kExitPass : kExitNegative;
}

void write_lambda_csv(std::ostream& os, const ExtremalCandidate& candidate,
                      const std::vector<Eigen::MatrixXd>& lambda) {
  const PiecewiseCurve& curve = candidate.curve;
  const int n = curve.state_dim();
  const int r = curve.control_dim();
  const int m = lambda.empty() ? 0 : static_cast<int>(lambda.front().cols());
  os << "t,arc";
  for (int i = 1; i <= n; ++i) os << ",q" << i;
  for (int a = 1; a <= r; ++a) os << ",z" << a;
  os << ",p0";
  for (int i = 1; i <= n; ++i) os << ",p" << i;
  for (int s = 1; s <= m; ++s) os << ",lambda" << s;
  os << "\n";
  for (int s = 0; s < curve.arc_count(); ++s) {
    const Arc& arc = curve.arc(s);
    const auto si = static_cast<std::size_t>(s);
    for (int k = 0; k <= arc.steps(); ++k) {
      os << fmt17(arc.time_at(k)) << ',' << s;
      for (int i = 0; i < n; ++i) os << ',' << fmt17(arc.q(k, i));
      for (int a = 0; a < r; ++a) os << ',' << fmt17(arc.z(k, a));
      os << ',' << fmt17(candidate.momenta.p0[si][k]);
      for (int i = 0; i < n; ++i) os << ',' << fmt17(candidate.momenta.p[si](k, i));
      for (int c = 0; c < m; ++c) os << ',' << fmt17(lambda[si](k, c));
      os << "\n";
    }
  }
}

int cmd_multipliers(const Loaded& loaded, const CliOptions& options,
                    std::ostream& out) {
  if (!loaded.problem.extrinsic) {
    throw InvalidInputError("multipliers needs an [extrinsic] section");
  }
  ControlSystem sys(loaded.problem.system);
  ExtrinsicProblem ext(*loaded.problem.extrinsic);
  const ExtremalCandidate candidate = obtain_candidate(loaded, sys, options, out);

  const double tolerance = options.tol_set
                               ? options.tol
                               : loaded.problem.numerics.acceptance_tolerance;
  const MultiplierPath multipliers = recover_multipliers(
      ext, sys, candidate, loaded.problem.numerics.admissibility_tolerance,
      tolerance);
  const CorrespondenceReport corr =
      verify_correspondence(ext, sys, candidate, multipliers);

  const int m = multipliers.lambda.empty()
                    ? 0
                    : static_cast<int>(multipliers.lambda.front().cols());
  out << "problem: " << loaded.name << "\n";
  out << "multipliers: " << m << "\n";
  out << "recovery defect: " << fmt6(multipliers.residual) << "\n";
  for (int c = 0; c < m; ++c) {
    const double first = multipliers.lambda.front()(0, c);
    const Eigen::MatrixXd& last_arc = multipliers.lambda.back();
    const double last = last_arc(last_arc.rows() - 1, c);
    out << "  lambda" << (c + 1) << ": " << fmt6(first) << " at start, "
        << fmt6(last) << " at end\n";
  }
  out << "correspondence:\n";
  out << "  euler_lagrange   " << fmt6(corr.euler_lagrange) << "\n";
  out << "  constraint       " << fmt6(corr.constraint) << "\n";
  out << "  momentum_match   " << fmt6(corr.momentum_match) << "\n";
  out << "  corner_momentum  " << fmt6(corr.corner_momentum) << "\n";
  out << "  corner_energy    " << fmt6(corr.corner_energy) << "\n";
  out << "  lambda_jump      " << fmt6(corr.lambda_jump) << "\n";

  const double worst = std::max(
      {multipliers.residual, corr.euler_lagrange, corr.constraint,
       corr.momentum_match, corr.corner_momentum, corr.corner_energy,
       corr.lambda_jump});
  const bool pass = worst <= tolerance;
  out << "tolerance: " << fmt6(tolerance) << "\n";
  print_verdict(out, pass);

  if (!options.csv_path.empty()) {
    std::ofstream csv(options.csv_path);
    if (!csv) throw IoError("cannot open " + options.csv_path + " for writing");
    write_lambda_csv(csv, candidate, multipliers.lambda);
  }
  Json doc;
  doc["command"] = "multipliers";
  doc["problem"] = loaded.name;
  doc["tolerance"] = tolerance;
  doc.update(multipliers_json(multipliers, corr));
  doc["pass"] = pass;
  write_report(doc, options.json_path);

  return pass ? kExitPass : kExitNegative;
}

int cmd_gauge_test(const Loaded& loaded, const CliOptions& options,
                   std::ostream& out) {
  if (options.gauge.empty()) {
    throw InvalidInputError("gauge-test needs --gauge EXPR (a function of t and the states)");
  }
  ControlSystem sys(loaded.problem.system);
  const ExtremalCandidate candidate = obtain_candidate(loaded, sys, options, out);
  const GaugeResult result =
      gauge_transform(loaded.problem.system, candidate, options.gauge);

  bool identical = candidate.curve.arc_count() == result.candidate.curve.arc_count();
  for (int s = 0; identical && s < candidate.curve.arc_count(); ++s) {
    const Arc& before = candidate.curve.arc(s);
    const Arc& after = result.candidate.curve.arc(s);
    identical = before.t_start == after.t_start && before.t_end == after.t_end &&
                before.q == after.q && before.z == after.z;
  }

  const double tolerance = options.tol_set
                               ? options.tol
                               : loaded.problem.numerics.acceptance_tolerance;
  out << "problem: " << loaded.name << "\n";
  out << "gauge f = " << options.gauge << "\n";
  out << "transformed lagrangian: " << result.spec.lagrangian << "\n";
  out << "curve bit-identical: " << (identical ? "yes" : "NO") << "\n";
  print_residual_table(out, result.candidate.residuals);
  const bool pass =
      identical && result.candidate.residuals.max_residual() <= tolerance;
  out << "tolerance: " << fmt6(tolerance) << "\n";
  print_verdict(out, pass);

  Json doc;
  doc["command"] = "gauge-test";
  doc["problem"] = loaded.name;
  doc["gauge"] = options.gauge;
  doc["transformed_lagrangian"] = result.spec.lagrangian;
  doc["tolerance"] = tolerance;
  doc["curve_identical"] = identical;
  doc["residuals"] = residuals_json(result.candidate.residuals);
  doc["pass"] = pass;
  write_report(doc, options.json_path);

  return pass ? kExitPass : kExitNegative;
}

void add_common_options(CLI::App* sub, CliOptions& options) {
  sub->add_option("file", options.file, "problem file (INI sections)");
  sub->add_option("--builtin", options.builtin, "embedded corpus problem name")
      ->excludes(sub->get_option("file"));
  sub->add_option("--json", options.json_path, "write the JSON report here");
  sub->add_option("--tol", options.tol, "tolerance override for this command")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"constrained variational calculus toolkit"};
  app.require_subcommand(1);

  CliOptions options;

  CLI::App* check = app.add_subcommand(
      "check", "admissibility residual, rank certificate, corner jumps");
  add_common_options(check, options);

  CLI::App* abnormality = app.add_subcommand(
      "abnormality", "abnormality index with the Gram cross check");
  add_common_options(abnormality, options);
  abnormality->add_flag("--scan-local", options.scan_local,
                        "also scan all subintervals for local normality");

  CLI::App* solve = app.add_subcommand(
      "solve", "shoot the fixed-endpoint boundary value problem");
  add_common_options(solve, options);
  solve->add_option("--csv", options.csv_path, "write the candidate CSV here");

  CLI::App* verify = app.add_subcommand(
      "verify", "residuals of a candidate CSV against this problem");
  add_common_options(verify, options);
  verify->add_option("--candidate", options.candidate_path,
                     "candidate CSV with momenta");

  CLI::App* multipliers = app.add_subcommand(
      "multipliers", "recover multipliers and verify the correspondence");
  add_common_options(multipliers, options);
  multipliers->add_option("--candidate", options.candidate_path,
                          "candidate CSV with momenta (default: run [solve])");
  multipliers->add_option("--csv", options.csv_path,
                          "write the candidate CSV with lambda columns here");

  CLI::App* gauge = app.add_subcommand(
      "gauge-test", "transform by a gauge function and re-verify");
  add_common_options(gauge, options);
  gauge->add_option("-f,--gauge", options.gauge, "gauge function of t and states");
  gauge->add_option("--candidate", options.candidate_path,
                    "candidate CSV with momenta (default: run [solve])");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("varcalc");
  for (const std::string& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitPass;
    }
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  options.tol_set = app.get_subcommands().front()->count("--tol") > 0;

  try {
    const Loaded loaded = load_problem(options);
    if (app.got_subcommand(check)) return cmd_check(loaded, options, out);
    if (app.got_subcommand(abnormality)) return cmd_abnormality(loaded, options, out);
    if (app.got_subcommand(solve)) return cmd_solve(loaded, options, out);
    if (app.got_subcommand(verify)) return cmd_verify(loaded, options, out);
    if (app.got_subcommand(multipliers)) return cmd_multipliers(loaded, options, out);
    if (app.got_subcommand(gauge)) return cmd_gauge_test(loaded, options, out);
    err << "error: no command selected\n";
    return kExitInput;
  } catch (const SyntaxError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const UnknownFunctionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const UnboundSymbolError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvalidInputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "analysis failed: " << e.what() << "\n";
    return kExitNegative;
  }
}

}  // namespace varcalc
