#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace varcalc {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed expression text. Carries the byte offset of the first
/// character that could not be consumed.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// An identifier was applied like a function but is not in the function table.
class UnknownFunctionError : public Error {
 public:
  explicit UnknownFunctionError(const std::string& name)
      : Error("unknown function '" + name + "'"), name_(name) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Evaluation or compilation met a symbol with no binding.
class UnboundSymbolError : public Error {
 public:
  explicit UnboundSymbolError(const std::string& name)
      : Error("unbound symbol '" + name + "'"), name_(name) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// A model expression produced NaN or Inf where a finite value is required.
/// The message names the offending expression and the evaluation point.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// The control distribution (or a constraint Jacobian) lost full rank.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

/// A curve violates the admissibility equations beyond tolerance.
class NotAdmissibleError : public Error {
 public:
  using Error::Error;
};

/// The transported frame became numerically singular.
class SingularFrameError : public Error {
 public:
  using Error::Error;
};

/// A supplied control-space metric is not symmetric positive definite.
class BadMetricError : public Error {
 public:
  using Error::Error;
};

/// The control Hessian degenerated where a regular reduction was required.
class RegularityFailureError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver exhausted its iteration budget.
class NoConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Data passed to a recovery routine is mutually inconsistent.
class InconsistentError : public Error {
 public:
  using Error::Error;
};

/// Malformed problem files, bad CLI arguments, out-of-range options.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Filesystem-level failures (missing files, unwritable outputs).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace varcalc
