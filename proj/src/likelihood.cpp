#include "oed/likelihood.hpp"

#include <algorithm>
#include <stdexcept>

#include "oed/errors.hpp"

namespace oed {

namespace {

// Floor on concentrated noise scales; keeps the zero-residual limit finite.
constexpr double kScaleFloor = 1e-300;

Eigen::VectorXd residuals(const LogisticParams& params, const Observations& obs) {
  return obs.values - solve_vec(params, obs.grid);
}

}  // namespace

double loglik_iid(const LogisticParams& params, const Observations& obs, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("loglik_iid: sigma2 must be > 0");
  const double n = static_cast<double>(obs.grid.size());
  const double ssr = residuals(params, obs).squaredNorm();
  return -0.5 * n * (kLog2Pi + std::log(sigma2)) - 0.5 * ssr / sigma2;
}

double sigma2_iid_hat(const LogisticParams& params, const Observations& obs) {
  return residuals(params, obs).squaredNorm() / static_cast<double>(obs.grid.size());
}

double loglik_ou(const LogisticParams& params, const Observations& obs, double phi,
                 double sigma2_ou) {
  if (!(sigma2_ou > 0.0)) throw std::invalid_argument("loglik_ou: sigma2_ou must be > 0");
  const CovMatrix cov = covariance(OuNoise(phi, sigma2_ou), obs.grid);
  const double n = static_cast<double>(obs.grid.size());
  const Eigen::VectorXd eps = residuals(params, obs);
  return -0.5 * n * kLog2Pi - 0.5 * cov.log_det() - 0.5 * cov.invquad(eps);
}

double sigma2_ou_hat(const LogisticParams& params, const Observations& obs, double phi) {
  const CovMatrix corr = ou_correlation(phi, obs.grid);
  const double n = static_cast<double>(obs.grid.size());
  const Eigen::VectorXd eps = residuals(params, obs);
  return 2.0 * phi / n * corr.invquad(eps);
}

LogLikEval::LogLikEval(Observations obs, NoiseSpec spec)
    : obs_(std::move(obs)), spec_(spec) {
  if (obs_.grid.size() == 0) throw std::invalid_argument("LogLikEval: empty observations");
  if (spec_.family == NoiseSpec::Family::ou) {
    if (!(spec_.phi > 0.0)) throw std::invalid_argument("LogLikEval: OU spec needs phi > 0");
    corr_.emplace(ou_correlation(spec_.phi, obs_.grid));
  }
  if (spec_.scale_mode == NoiseSpec::ScaleMode::fixed && !(spec_.fixed_scale > 0.0))
    throw std::invalid_argument("LogLikEval: fixed noise scale must be > 0");
}

double LogLikEval::operator()(const LogisticParams& params) const {
  const double n = static_cast<double>(obs_.grid.size());
  const Eigen::VectorXd eps = residuals(params, obs_);
  if (spec_.family == NoiseSpec::Family::iid) {
    if (spec_.scale_mode == NoiseSpec::ScaleMode::fixed) {
      const double s2 = spec_.fixed_scale;
      return -0.5 * n * (kLog2Pi + std::log(s2)) - 0.5 * eps.squaredNorm() / s2;
    }
    const double s2_hat = std::max(eps.squaredNorm() / n, kScaleFloor);
    return -0.5 * n * (kLog2Pi + std::log(s2_hat) + 1.0);
  }
  // OU: quadratic form against the unit kernel; the scale enters in closed form.
  const double q = corr_->invquad(eps);
  const double two_phi = 2.0 * spec_.phi;
  if (spec_.scale_mode == NoiseSpec::ScaleMode::fixed) {
    const double v = spec_.fixed_scale / two_phi;  // stationary variance
    return -0.5 * n * (kLog2Pi + std::log(v)) - 0.5 * corr_->log_det() - 0.5 * q / v;
  }
  const double v_hat = std::max(q / n, kScaleFloor);  // = sigma2_ou_hat / (2 phi)
  return -0.5 * n * (kLog2Pi + std::log(v_hat) + 1.0) - 0.5 * corr_->log_det();
}

double LogLikEval::noise_scale(const LogisticParams& params) const {
  if (spec_.scale_mode == NoiseSpec::ScaleMode::fixed) return spec_.fixed_scale;
  const Eigen::VectorXd eps = residuals(params, obs_);
  const double n = static_cast<double>(obs_.grid.size());
  if (spec_.family == NoiseSpec::Family::iid) return eps.squaredNorm() / n;
  return 2.0 * spec_.phi / n * corr_->invquad(eps);
}

namespace {

// Smooth bijection R -> (lo, hi); flat at the box faces so the simplex never
// steps outside.
double box_forward(double u, double lo, double hi) {
  return lo + (hi - lo) * 0.5 * (1.0 + std::sin(u));
}

double box_inverse(double theta, double lo, double hi) {
  double f = (theta - lo) / (hi - lo);
  f = std::clamp(f, 1e-12, 1.0 - 1e-12);
  return std::asin(2.0 * f - 1.0);
}

}  // namespace

ConstrainedFit maximize_constrained(const LogLikEval& eval, const ParamRanges& box,
                                    int fixed_index, double fixed_value,
                                    const std::vector<Eigen::Vector3d>& starts,
                                    const NelderMeadOptions& nm) {
  std::vector<int> free_idx;
  for (int i = 0; i < 3; ++i)
    if (i != fixed_index) free_idx.push_back(i);
  const int dim = static_cast<int>(free_idx.size());

  auto unpack = [&](const Eigen::VectorXd& u) {
    Eigen::Vector3d theta;
    if (fixed_index >= 0) theta[fixed_index] = fixed_value;
    for (int j = 0; j < dim; ++j)
      theta[free_idx[j]] = box_forward(u[j], box.lo[free_idx[j]], box.hi[free_idx[j]]);
    return theta;
  };
  auto objective = [&](const Eigen::VectorXd& u) {
    return -eval(LogisticParams::from_vec(unpack(u)));
  };

  ConstrainedFit best{Eigen::Vector3d::Zero(), -std::numeric_limits<double>::infinity(),
                      false};
  for (const Eigen::Vector3d& start : starts) {
    Eigen::VectorXd u0(dim);
    for (int j = 0; j < dim; ++j)
      u0[j] = box_inverse(start[free_idx[j]], box.lo[free_idx[j]], box.hi[free_idx[j]]);
    NelderMeadResult r = nelder_mead_minimize(objective, u0, nm);
    const double value = -r.value;
    if (value > best.loglik) {
      best.params = unpack(r.x);
      best.loglik = value;
      best.converged = r.converged;
    } else if (value == best.loglik && r.converged) {
      best.converged = true;
    }
  }
  return best;
}

FitResult fit_mle(const Observations& obs, const NoiseSpec& spec, const ParamRanges& box,
                  const FitOptions& opt, Rng& rng) {
  if (obs.grid.size() == 0) throw std::invalid_argument("fit_mle: empty observations");
  if (opt.restarts < 1) throw std::invalid_argument("fit_mle: restarts must be >= 1");

  const LogLikEval eval(obs, spec);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  bool any_converged = false;
  double best_value = -std::numeric_limits<double>::infinity();
  Eigen::Vector3d best_params = 0.5 * (box.lo + box.hi);
  for (int k = 0; k < opt.restarts; ++k) {
    Eigen::Vector3d start;
    for (int i = 0; i < 3; ++i) start[i] = box.lo[i] + unif(rng) * (box.hi[i] - box.lo[i]);
    const ConstrainedFit fit = maximize_constrained(eval, box, -1, 0.0, {start}, opt.nm);
    any_converged = any_converged || fit.converged;
    if (fit.loglik > best_value) {
      best_value = fit.loglik;
      best_params = fit.params;
    }
  }
  if (!any_converged)
    throw NoConvergence("fit_mle: no restart met the optimizer tolerances");

  const LogisticParams mle = LogisticParams::from_vec(best_params);
  return FitResult{mle, best_value, eval.noise_scale(mle), any_converged, opt.restarts};
}

}  // namespace oed
