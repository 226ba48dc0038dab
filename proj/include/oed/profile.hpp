#ifndef OED_PROFILE_HPP
#define OED_PROFILE_HPP

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "oed/likelihood.hpp"
#include "oed/model.hpp"
#include "oed/noise.hpp"

namespace oed {

/// chi2(0.95; 1)/2: profile drop defining the 95% confidence interval.
inline constexpr double kCi95Drop = 1.920729410347062;
/// chi2(0.95; 3)/2: drop defining the joint 95% confidence region.
inline constexpr double kRegion95Drop = 3.9073639516255896;
/// Standard normal 95% quantile; half-width of the noise band.
inline constexpr double kNormal95 = 1.6448536269514722;

struct CiEndpoint {
  double value = 0.0;
  bool open = false;  // no threshold crossing before the profiling boundary
};

struct ConfidenceInterval {
  CiEndpoint lower;
  CiEndpoint upper;

  bool closed() const { return !lower.open && !upper.open; }
  double width() const { return upper.value - lower.value; }
};

struct ProfilePoint {
  double theta = 0.0;
  double lp = 0.0;     // normalized profile log-likelihood, <= 0
  bool valid = true;   // nuisance optimization met tolerances
};

struct ProfileResult {
  int param_index = 0;
  std::vector<ProfilePoint> points;  // ascending in theta
  LogisticParams mle;
  double mle_loglik = 0.0;
  ConfidenceInterval ci;
};

struct ProfileOptions {
  int points_per_side = 20;          // grid points on each side of the MLE
  double max_range_multiplier = 4.0; // adaptive extension cap, in box widths
  int fit_restarts = 50;             // multistart budget for the global MLE
  NelderMeadOptions nm{1e-10, 1e-8, 2000, 0.35};
};

/// Univariate normalized profile log-likelihood of one parameter:
/// lp(v) = sup over the nuisance parameters of L - sup over all of L,
/// swept outward from the MLE with warm starts, over a grid spanning the
/// profiling box (extended adaptively while no -1.92 crossing is bracketed,
/// up to max_range_multiplier box widths). The 95% CI comes from linear
/// interpolation of the crossings; an endpoint with no crossing is open.
ProfileResult profile_parameter(const Observations& obs, const NoiseSpec& spec,
                                int param_index, const ParamRanges& box,
                                const ProfileOptions& opt, std::uint64_t seed,
                                const FitResult* fit = nullptr);

/// Threshold-crossing endpoints of a profile curve (>= 2 valid points).
ConfidenceInterval confidence_interval(const std::vector<ProfilePoint>& points,
                                       double drop = kCi95Drop);

struct PredictionBand {
  TimeGrid grid;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct PredictionBandOptions {
  int n_samples = 50000;      // uniform parameter draws over the box
  int min_retained = 50;      // TooFewRetained below this
  double grid_step = 1.0;     // densification step for the band grid
  int fit_restarts = 50;
};

/// 95% prediction band: envelope of trajectories whose normalized
/// log-likelihood clears -chi2(0.95;3)/2, widened by the 5%/95% noise
/// quantiles of the analysis noise model.
PredictionBand prediction_band(const Observations& obs, const NoiseSpec& spec,
                               const ParamRanges& box, const PredictionBandOptions& opt,
                               std::uint64_t seed, const FitResult* fit = nullptr);

}  // namespace oed

#endif  // OED_PROFILE_HPP
