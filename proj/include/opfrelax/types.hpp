#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace opfrelax {

/// Per-unit complex quantity (voltage, power, admittance).
using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (case files, JSON fixtures).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally invalid model (islanded network, unsupported element, size cap).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// The model admits no feasible point (detected by the solver or a pin check).
class InfeasibleError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Precondition of a completion or recovery routine violated by the data.
class CompletionError : public Error {
 public:
  using Error::Error;
};

/// Maps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace opfrelax
