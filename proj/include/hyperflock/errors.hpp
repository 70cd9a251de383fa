#pragma once

#include <stdexcept>
#include <string>

namespace hyperflock {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The constraint gradient vanished (or nearly so) at a point that should be
/// a regular surface point.
struct SingularPoint : Error {
  using Error::Error;
};

/// Nearest-point projection failed to reach the requested tolerance.
struct RetractionDiverged : Error {
  using Error::Error;
};

/// Random surface sampling could not bracket the surface along a ray.
struct SamplingFailed : Error {
  using Error::Error;
};

struct InvalidParameter : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct IndexOutOfRange : Error {
  using Error::Error;
};

/// A configuration was fed to equilibrium-only machinery without being one.
struct NotEquilibrium : Error {
  NotEquilibrium(const std::string& what, double residual_)
      : Error(what), residual(residual_) {}
  double residual;
};

struct NotSPD : Error {
  using Error::Error;
};

struct NotOnSurface : Error {
  using Error::Error;
};

/// The oblique projector's denominator <x, grad c(x)> was too close to zero.
struct TransversalityViolated : Error {
  using Error::Error;
};

/// Malformed or inconsistent run configuration (maps to CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace hyperflock
