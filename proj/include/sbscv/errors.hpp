#pragma once

#include <stdexcept>
#include <string>

namespace sbscv {

// Error taxonomy. Everything thrown by the library derives from Error, so
// callers can catch broadly or per category.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed arguments: non-finite entries, dimension mismatches, preconditions
// (overlapping cells, non-resolving measurements, ...).
struct InvalidInput : Error {
  using Error::Error;
};

// Scenario / configuration problems: unknown keys, bad schema, states leaking
// off the grid, invalid grid or packet parameters.
struct ConfigError : Error {
  using Error::Error;
};

// Resource limits: a requested joint dimension exceeds the configured cap.
struct ResourceError : Error {
  using Error::Error;
};

// Numerical failures: eigenvalues below the PSD clip window, degenerate
// candidates, empty branches, environment truncation drift.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace sbscv
