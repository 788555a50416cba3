#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace varcalc {

/// Runs the varcalc command line: check, abnormality, solve, verify,
/// multipliers, gauge-test. `args` excludes the program name. Human output
/// goes to `out`, diagnostics to `err`. Returns the process exit code:
/// 0 the analysis passed, 1 the analysis came back negative (abnormal curve,
/// residuals above tolerance, no convergence), 2 the input was invalid.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace varcalc
