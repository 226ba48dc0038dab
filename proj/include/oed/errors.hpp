#ifndef OED_ERRORS_HPP
#define OED_ERRORS_HPP

#include <stdexcept>

namespace oed {

/// Covariance (or information) matrix is numerically not positive definite.
struct FactorizationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested design cannot satisfy the spacing/endpoint constraints.
struct InfeasibleConstraints : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A design time has no exact match in a cached sensitivity grid.
struct TimeNotInGrid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Output variance at a grid time is below the estimator floor.
struct DegenerateVariance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every optimizer restart exhausted its budget without meeting tolerances.
struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Too few parameter samples passed the confidence-region threshold.
struct TooFewRetained : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scenario/config file failed validation; message carries field context.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace oed

#endif  // OED_ERRORS_HPP
