#ifndef OED_NOISE_HPP
#define OED_NOISE_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <variant>

#include "oed/errors.hpp"
#include "oed/model.hpp"
#include "oed/rng.hpp"

namespace oed {

/// Uncorrelated Gaussian observation noise with variance sigma2.
class IidNoise {
 public:
  explicit IidNoise(double sigma2) : sigma2_(sigma2) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("IidNoise: sigma2 must be > 0");
  }

  double sigma2() const { return sigma2_; }

  /// Test hook: accepts sigma2 == 0 so samplers can be checked against the
  /// exact zero-noise limit. Not a valid input for covariance().
  static IidNoise degenerate_for_test(double sigma2) {
    IidNoise n;
    n.sigma2_ = sigma2;
    return n;
  }

 private:
  IidNoise() = default;
  double sigma2_ = 0.0;
};

/// Stationary Ornstein-Uhlenbeck observation noise
///
///   d eps = -phi eps dt + sigma_ou dW,   eps(0) ~ N(0, sigma2_ou / (2 phi)),
///
/// so every marginal is the stationary distribution and the autocorrelation
/// at lag D is e^{-phi D}.
class OuNoise {
 public:
  OuNoise(double phi, double sigma2_ou) : phi_(phi), sigma2_ou_(sigma2_ou) {
    if (!(phi > 0.0)) throw std::invalid_argument("OuNoise: phi must be > 0");
    if (!(sigma2_ou > 0.0)) throw std::invalid_argument("OuNoise: sigma2_ou must be > 0");
  }

  double phi() const { return phi_; }
  double sigma2_ou() const { return sigma2_ou_; }
  double stationary_variance() const { return sigma2_ou_ / (2.0 * phi_); }

  /// Test hook: accepts sigma2_ou == 0 (degenerate zero-noise process).
  static OuNoise degenerate_for_test(double phi, double sigma2_ou) {
    OuNoise n;
    n.phi_ = phi;
    n.sigma2_ou_ = sigma2_ou;
    return n;
  }

 private:
  OuNoise() = default;
  double phi_ = 0.0;
  double sigma2_ou_ = 0.0;
};

using NoiseModel = std::variant<IidNoise, OuNoise>;

inline bool is_ou(const NoiseModel& m) { return std::holds_alternative<OuNoise>(m); }

/// AC(lag) = e^{-phi lag} for lag >= 0.
inline double autocorrelation(const OuNoise& noise, double lag) {
  if (!(lag >= 0.0)) throw std::invalid_argument("autocorrelation: lag must be >= 0");
  return std::exp(-noise.phi() * lag);
}

/// Symmetric positive-definite covariance with a cached Cholesky factor and
/// log-determinant. Quadratic forms and solves go through the factor; the
/// inverse is never formed.
class CovMatrix {
 public:
  explicit CovMatrix(Eigen::MatrixXd sigma) : sigma_(std::move(sigma)) {
    if (sigma_.rows() != sigma_.cols())
      throw std::invalid_argument("CovMatrix: matrix must be square");
    if (!sigma_.isApprox(sigma_.transpose(), 1e-12))
      throw std::invalid_argument("CovMatrix: matrix must be symmetric");
    llt_.compute(sigma_);
    if (llt_.info() != Eigen::Success)
      throw FactorizationFailed("CovMatrix: Cholesky factorization failed (matrix not PD)");
    log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
    if (!std::isfinite(log_det_))
      throw FactorizationFailed("CovMatrix: non-finite log-determinant");
  }

  Eigen::Index dim() const { return sigma_.rows(); }
  const Eigen::MatrixXd& matrix() const { return sigma_; }
  double log_det() const { return log_det_; }

  /// Sigma^{-1} rhs via the cached factor.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }

  /// v' Sigma^{-1} v through one triangular solve.
  double invquad(const Eigen::VectorXd& v) const {
    Eigen::VectorXd half = llt_.matrixL().solve(v);
    return half.squaredNorm();
  }

  /// Lower Cholesky factor L with Sigma = L L'.
  Eigen::MatrixXd cholesky_lower() const { return llt_.matrixL(); }

 private:
  Eigen::MatrixXd sigma_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
};

/// Covariance of the noise on `grid`: sigma2 I for IID,
/// Sigma_ij = sigma2_ou/(2 phi) e^{-phi |t_i - t_j|} for OU.
inline CovMatrix covariance(const NoiseModel& noise, const TimeGrid& grid) {
  const Eigen::Index n = grid.size();
  Eigen::MatrixXd sigma(n, n);
  if (const auto* iid = std::get_if<IidNoise>(&noise)) {
    sigma = iid->sigma2() * Eigen::MatrixXd::Identity(n, n);
  } else {
    const auto& ou = std::get<OuNoise>(noise);
    const double v = ou.stationary_variance();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double c = v * std::exp(-ou.phi() * (grid[i] - grid[j]));
        sigma(i, j) = c;
        sigma(j, i) = c;
      }
  }
  return CovMatrix(std::move(sigma));
}

/// Unit-variance OU kernel on `grid`: entries e^{-phi |t_i - t_j|}.
inline CovMatrix ou_correlation(double phi, const TimeGrid& grid) {
  if (!(phi > 0.0)) throw std::invalid_argument("ou_correlation: phi must be > 0");
  const Eigen::Index n = grid.size();
  Eigen::MatrixXd corr(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double c = std::exp(-phi * (grid[i] - grid[j]));
      corr(i, j) = c;
      corr(j, i) = c;
    }
  return CovMatrix(std::move(corr));
}

/// Observed values paired with their observation times.
struct Observations {
  TimeGrid grid;
  Eigen::VectorXd values;

  Observations(TimeGrid g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (grid.size() != values.size())
      throw std::invalid_argument("Observations: grid/value length mismatch");
  }
};

/// One noise path on `grid`. IID draws are independent N(0, sigma2); the OU
/// path uses the exact conditional transitions
///   eps_1 ~ N(0, v),  eps_{i+1} | eps_i ~ N(eps_i e^{-phi d_i}, v (1 - e^{-2 phi d_i})),
/// v = sigma2_ou/(2 phi), so there is no discretization error. Deterministic
/// given the generator state.
inline Eigen::VectorXd sample_noise(const NoiseModel& noise, const TimeGrid& grid, Rng& rng) {
  const Eigen::Index n = grid.size();
  Eigen::VectorXd eps(n);
  std::normal_distribution<double> z(0.0, 1.0);
  if (const auto* iid = std::get_if<IidNoise>(&noise)) {
    const double sd = std::sqrt(iid->sigma2());
    for (Eigen::Index i = 0; i < n; ++i) eps[i] = sd * z(rng);
  } else {
    const auto& ou = std::get<OuNoise>(noise);
    const double v = ou.stationary_variance();
    eps[0] = std::sqrt(v) * z(rng);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double decay = std::exp(-ou.phi() * (grid[i + 1] - grid[i]));
      const double cond_sd = std::sqrt(v * (1.0 - decay * decay));
      eps[i + 1] = eps[i] * decay + cond_sd * z(rng);
    }
  }
  return eps;
}

/// Joint sampler L z with z ~ N(0, I); reference implementation used to
/// cross-check the sequential sampler's distribution.
inline Eigen::VectorXd sample_noise_joint(const CovMatrix& cov, Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::VectorXd u(cov.dim());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = z(rng);
  return cov.cholesky_lower() * u;
}

/// Y = C(theta) + eps on `grid`.
inline Observations synthesize(const LogisticParams& params, const NoiseModel& noise,
                               const TimeGrid& grid, Rng& rng) {
  Eigen::VectorXd values = solve_vec(params, grid) + sample_noise(noise, grid, rng);
  return Observations(grid, std::move(values));
}

}  // namespace oed

#endif  // OED_NOISE_HPP
