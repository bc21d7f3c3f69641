#pragma once
#include <stdexcept>
#include <string>

namespace cazp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation point sits on top of a zero of the entire function; the caller
// (typically a descent integrator) must treat this as arrival, not failure.
struct NearZeroError : Error {
  using Error::Error;
};

// An iterative solver failed to reach its tolerance within its budget.
struct ConvergenceError : Error {
  using Error::Error;
};

// A contour or boundary sits too close to a zero for a reliable answer.
struct BoundaryError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

// A computed region reaches the edge of its grid window; the result would be
// clipped, so the caller must shrink the request or enlarge the window.
struct ClippedError : Error {
  using Error::Error;
};

}  // namespace cazp
