// errors.hpp — typed failure taxonomy shared by every module.
#pragma once

#include <stdexcept>
#include <string>

namespace necrostrip {

/**
 * Every failure the library can raise, grouped by how a caller should react.
 *
 *  - validation errors (bad inputs, bad config): fix the input and retry;
 *  - numerical errors (solver budget exhausted, singular system): a bug or an
 *    under-resolved discretization, not a property of the model;
 *  - model-regime errors: the requested configuration leaves the regime in
 *    which the model (and its analysis) is meaningful.
 */
enum class ErrorKind {
  // validation
  OrderingViolation,     ///< parameter chain 0 < sigma_hat < sigma_tilde < sigma_bar broken
  NonPositiveRate,       ///< mu, nu, or gamma not strictly positive
  OutOfDomain,           ///< evaluation point outside the strip
  ConfigError,           ///< malformed / unknown / missing configuration key
  InsufficientData,      ///< rate fit asked for a window with < 10 samples
  NonPositiveAmplitude,  ///< rate fit window contains no usable amplitude
  // numerical
  NoConvergence,         ///< iteration budget exhausted with residual above tolerance
  SingularSystem,        ///< linear solve broke down
  MinStepReached,        ///< adaptive stepper collapsed below dt0 * 1e-6
  NonMonotoneColumn,     ///< active set has several transitions in one column
  TailNotCertified,      ///< K_max too small to certify the spectral threshold
  // model regime
  NoFlatStationary,      ///< sigma_bar <= sigma_star: no flat stationary solution exists
  GeometryViolation,     ///< upper boundary too close to the stationary inner interface
  DegenerateActiveSet,   ///< necrotic layer vanished or filled the whole strip
};

/** Process exit code for a failure category (0 is success). */
constexpr int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::OrderingViolation:
    case ErrorKind::NonPositiveRate:
    case ErrorKind::OutOfDomain:
    case ErrorKind::ConfigError:
    case ErrorKind::InsufficientData:
    case ErrorKind::NonPositiveAmplitude:
      return 2;
    case ErrorKind::NoConvergence:
    case ErrorKind::SingularSystem:
    case ErrorKind::MinStepReached:
    case ErrorKind::NonMonotoneColumn:
    case ErrorKind::TailNotCertified:
      return 3;
    case ErrorKind::NoFlatStationary:
    case ErrorKind::GeometryViolation:
    case ErrorKind::DegenerateActiveSet:
      return 4;
  }
  return 1;
}

/** Stable name used in error messages and logs. */
constexpr const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::OrderingViolation:    return "OrderingViolation";
    case ErrorKind::NonPositiveRate:      return "NonPositiveRate";
    case ErrorKind::OutOfDomain:          return "OutOfDomain";
    case ErrorKind::ConfigError:          return "ConfigError";
    case ErrorKind::InsufficientData:     return "InsufficientData";
    case ErrorKind::NonPositiveAmplitude: return "NonPositiveAmplitude";
    case ErrorKind::NoConvergence:        return "NoConvergence";
    case ErrorKind::SingularSystem:       return "SingularSystem";
    case ErrorKind::MinStepReached:       return "MinStepReached";
    case ErrorKind::NonMonotoneColumn:    return "NonMonotoneColumn";
    case ErrorKind::TailNotCertified:     return "TailNotCertified";
    case ErrorKind::NoFlatStationary:     return "NoFlatStationary";
    case ErrorKind::GeometryViolation:    return "GeometryViolation";
    case ErrorKind::DegenerateActiveSet:  return "DegenerateActiveSet";
  }
  return "UnknownError";
}

/** Exception carrying a kind plus a human-readable message. */
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return necrostrip::exit_code(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace necrostrip
