#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace alpertlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A cube operation left the truncated grid (e.g. an ancestor above the root).
class OutOfGridError : public Error {
public:
  using Error::Error;
};

/// A Gram or moment matrix was numerically singular.
class ConditioningError : public Error {
public:
  using Error::Error;
};

/// An integrand produced a non-finite value.
class EvaluationError : public Error {
public:
  using Error::Error;
};

/// Coefficient blocks do not match the truncation they claim to describe.
class StructureError : public Error {
public:
  using Error::Error;
};

/// Invalid experiment configuration (maps to exit code 64).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Iterative solver failed to reach its tolerance.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string &what, std::vector<double> history)
      : Error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

} // namespace alpertlab
