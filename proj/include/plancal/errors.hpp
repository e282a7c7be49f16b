#ifndef PLANCAL_ERRORS_HPP_
#define PLANCAL_ERRORS_HPP_

#include <stdexcept>

namespace plancal {

/// Base class for all plancal errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input dimensions do not agree (vector sizes, row counts, ...).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// The stacked Jacobian does not have full column rank; the plan is not
/// identifiable (too few or degenerate configurations).
class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// The information matrix cannot be inverted at the requested conditioning
/// threshold.
class SingularInformation : public Error {
 public:
  using Error::Error;
};

/// Fewer experiments than required (m < n).
class InsufficientPoints : public Error {
 public:
  using Error::Error;
};

/// Joint limits leave no feasible configuration.
class Infeasible : public Error {
 public:
  using Error::Error;
};

/// A file could not be parsed; the message carries file/line/field context.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A run configuration value is missing or invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace plancal

#endif  // PLANCAL_ERRORS_HPP_
