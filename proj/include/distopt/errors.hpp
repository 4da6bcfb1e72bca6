#pragma once

#include <stdexcept>
#include <string>

namespace distopt {

/// Invalid parameters, dimension mismatches, or unknown configuration keys.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The problem data contradicts a modelling assumption discovered at run time
/// (e.g. a violated soft constraint with a zero subgradient).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Feasibility projection failed to converge; the local set is probably empty.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterates left the 1e8 sup-norm ball.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The centralized reference solver could not certify its answer.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A standing assumption failed validation; the message names the assumption.
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace distopt
