#pragma once

#include <string>

#include "json.hpp"
#include "varcalc/abnormality.hpp"
#include "varcalc/extremal.hpp"
#include "varcalc/multipliers.hpp"

namespace varcalc {

/// Key-order-preserving JSON document, the format of every machine artifact.
using Json = nlohmann::ordered_json;

/// Serializes an abnormality analysis: index, flags, per-arc indices, the
/// Gram cross check, singular values, initial covector basis, and the local
/// scan when one ran (null otherwise).
Json abnormality_json(const AbnormalityReport& report);

/// Serializes the residual block of a candidate (all eight diagnostics plus
/// the governing maximum).
Json residuals_json(const ResidualReport& residuals);

/// Serializes a boundary value solve: convergence data, the corner times of
/// the solution, its residuals, and the abnormality certificate.
Json solve_json(const ShootingResult& result);

/// Serializes a multiplier recovery together with its correspondence check.
Json multipliers_json(const MultiplierPath& multipliers,
                      const CorrespondenceReport& correspondence);

/// Structural comparison with numeric slack: floating point leaves agree
/// when |a - b| <= tolerance * max(1, |a|, |b|); integers, booleans and
/// strings must match exactly; arrays and objects must match in shape.
bool json_numeric_equal(const Json& a, const Json& b, double tolerance = 1e-9);

/// Writes a document to disk (two-space indent, trailing newline).
/// IoError when the file cannot be created or written.
void write_json_file(const Json& doc, const std::string& path);

}  // namespace varcalc
