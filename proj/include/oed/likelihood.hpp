#ifndef OED_LIKELIHOOD_HPP
#define OED_LIKELIHOOD_HPP

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <vector>

#include "oed/model.hpp"
#include "oed/nelder_mead.hpp"
#include "oed/noise.hpp"
#include "oed/rng.hpp"

namespace oed {

inline constexpr double kLog2Pi = 1.8378770664093454836;

/// Gaussian log-likelihood with independent noise:
///   -(n/2) log(2 pi sigma2) - (1/(2 sigma2)) sum (Y - C)^2.
double loglik_iid(const LogisticParams& params, const Observations& obs, double sigma2);

/// Noise-variance MLE (1/n) sum (Y - C)^2 for fixed model parameters.
double sigma2_iid_hat(const LogisticParams& params, const Observations& obs);

/// Gaussian log-likelihood with OU noise, using the covariance of the
/// process on the observation grid:
///   -(n/2) log(2 pi) - (1/2) log det Sigma - (1/2) eps' Sigma^{-1} eps.
/// Solved through the Cholesky factor; Sigma^{-1} is never formed.
double loglik_ou(const LogisticParams& params, const Observations& obs, double phi,
                 double sigma2_ou);

/// Volatility MLE for known phi: (2 phi / n) eps' S~^{-1} eps, where
/// S~_ij = e^{-phi |t_i - t_j|} is the unit-variance OU kernel.
double sigma2_ou_hat(const LogisticParams& params, const Observations& obs, double phi);

/// Analysis-side noise assumption: which family, the (known) mean-reversion
/// rate for OU, and whether the noise scale is concentrated out at its MLE
/// or pinned to a fixed value.
struct NoiseSpec {
  enum class Family { iid, ou };
  enum class ScaleMode { profiled, fixed };

  Family family = Family::iid;
  double phi = 0.0;          // OU only; never estimated
  ScaleMode scale_mode = ScaleMode::profiled;
  double fixed_scale = 0.0;  // sigma2_iid or sigma2_ou when fixed

  static NoiseSpec iid_profiled() { return {}; }
  static NoiseSpec iid_fixed(double sigma2) {
    return {Family::iid, 0.0, ScaleMode::fixed, sigma2};
  }
  static NoiseSpec ou_profiled(double phi) {
    return {Family::ou, phi, ScaleMode::profiled, 0.0};
  }
  static NoiseSpec ou_fixed(double phi, double sigma2_ou) {
    return {Family::ou, phi, ScaleMode::fixed, sigma2_ou};
  }
};

/// Repeated-evaluation cache for one data set under one noise assumption.
/// The correlation kernel of the grid is factorized once; each evaluation
/// costs one model sweep plus a triangular solve.
class LogLikEval {
 public:
  LogLikEval(Observations obs, NoiseSpec spec);

  /// Log-likelihood at `params`, with the noise scale concentrated out
  /// (profiled mode) or held at the configured value (fixed mode).
  double operator()(const LogisticParams& params) const;

  /// The noise scale the likelihood above used: sigma2-hat in profiled
  /// mode, the fixed value otherwise.
  double noise_scale(const LogisticParams& params) const;

  const Observations& obs() const { return obs_; }
  const NoiseSpec& spec() const { return spec_; }

 private:
  Observations obs_;
  NoiseSpec spec_;
  std::optional<CovMatrix> corr_;  // unit OU kernel on the grid (OU only)
};

/// Maximum-likelihood fit of the model parameters.
struct FitResult {
  LogisticParams mle;
  double loglik;
  double noise_scale_hat;
  bool converged;
  int restarts_used;
};

struct FitOptions {
  int restarts = 50;
  NelderMeadOptions nm{1e-10, 1e-8, 2000, 0.35};
};

/// Box-constrained multistart fit: `restarts` uniform starting points in
/// `box`, each polished by a simplex search on a smooth transform of the
/// box. Deterministic given `rng` state. Throws NoConvergence if every
/// restart exhausts its budget without meeting tolerances.
FitResult fit_mle(const Observations& obs, const NoiseSpec& spec, const ParamRanges& box,
                  const FitOptions& opt, Rng& rng);

/// One profile-likelihood inner step: maximize over the parameters other
/// than `fixed_index`, which is pinned to `fixed_value`. Each entry of
/// `starts` is a full parameter vector (its pinned coordinate is ignored).
struct ConstrainedFit {
  Eigen::Vector3d params;
  double loglik;
  bool converged;
};

ConstrainedFit maximize_constrained(const LogLikEval& eval, const ParamRanges& box,
                                    int fixed_index, double fixed_value,
                                    const std::vector<Eigen::Vector3d>& starts,
                                    const NelderMeadOptions& nm);

}  // namespace oed

#endif  // OED_LIKELIHOOD_HPP
