#include "oed/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oed/errors.hpp"
#include "oed/rng.hpp"

namespace oed {

namespace {

struct RawPoint {
  double theta;
  double loglik;  // un-normalized profile value
  bool valid;
};

// One nuisance maximization at a pinned coordinate: warm start from the
// neighboring grid point plus one seeded fallback start.
ConstrainedFit profile_point(const LogLikEval& eval, const ParamRanges& box, int index,
                             double value, const Eigen::Vector3d& warm,
                             const NelderMeadOptions& nm, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::Vector3d fallback;
  for (int i = 0; i < 3; ++i)
    fallback[i] = box.lo[i] + unif(rng) * (box.hi[i] - box.lo[i]);
  return maximize_constrained(eval, box, index, value, {warm, fallback}, nm);
}

}  // namespace

ProfileResult profile_parameter(const Observations& obs, const NoiseSpec& spec,
                                int param_index, const ParamRanges& box,
                                const ProfileOptions& opt, std::uint64_t seed,
                                const FitResult* fit) {
  if (param_index < 0 || param_index > 2)
    throw std::invalid_argument("profile_parameter: param_index must be 0, 1 or 2");

  const LogLikEval eval(obs, spec);

  FitResult local_fit = [&] {
    if (fit) return *fit;
    Rng fit_rng = make_rng(child_seed(seed, 0));
    return fit_mle(obs, spec, box, FitOptions{opt.fit_restarts, opt.nm}, fit_rng);
  }();

  const Eigen::Vector3d theta_hat = local_fit.mle.vec();
  const double center = theta_hat[param_index];
  const double range = box.width(param_index);
  const double hard_lo =
      std::max(center - opt.max_range_multiplier * range, 1e-3 * box.lo[param_index]);
  const double hard_hi = center + opt.max_range_multiplier * range;

  Rng rng = make_rng(child_seed(seed, 1 + static_cast<std::uint64_t>(param_index)));

  // Sweep outward from the MLE in both directions; each nuisance argmax
  // warm-starts the next grid point. Past the box, keep stepping only until
  // a -1.92 crossing is bracketed (or the hard limit is hit).
  std::vector<RawPoint> down, up;
  auto run_side = [&](int direction, std::vector<RawPoint>& side) {
    const double soft_limit = direction < 0 ? box.lo[param_index] : box.hi[param_index];
    double step = direction * (soft_limit - center) / opt.points_per_side;
    if (step <= 0.0) step = range / (2.0 * opt.points_per_side);

    Eigen::Vector3d warm = theta_hat;
    bool crossed = false;
    int j = 1;
    while (true) {
      const double v = center + direction * j * step;
      if (v < hard_lo || v > hard_hi) break;
      const bool inside_box = j <= opt.points_per_side;
      if (!inside_box && crossed) break;

      const ConstrainedFit cf = profile_point(eval, box, param_index, v, warm, opt.nm, rng);
      side.push_back(RawPoint{v, cf.loglik, cf.converged});
      if (cf.converged) {
        warm = cf.params;
        if (cf.loglik - local_fit.loglik < -(kCi95Drop + 0.25)) crossed = true;
      }
      ++j;
    }
  };
  run_side(-1, down);
  run_side(+1, up);

  // Assemble ascending points with the MLE coordinate in the middle and
  // re-normalize against the best value seen anywhere.
  double best = local_fit.loglik;
  for (const auto& p : down)
    if (p.valid) best = std::max(best, p.loglik);
  for (const auto& p : up)
    if (p.valid) best = std::max(best, p.loglik);

  ProfileResult result{param_index, {}, local_fit.mle, local_fit.loglik, {}};
  result.points.reserve(down.size() + up.size() + 1);
  for (auto it = down.rbegin(); it != down.rend(); ++it)
    result.points.push_back({it->theta, it->loglik - best, it->valid});
  result.points.push_back({center, local_fit.loglik - best, true});
  for (const auto& p : up) result.points.push_back({p.theta, p.loglik - best, p.valid});

  result.ci = confidence_interval(result.points);
  return result;
}

ConfidenceInterval confidence_interval(const std::vector<ProfilePoint>& points,
                                       double drop) {
  std::vector<const ProfilePoint*> valid;
  for (const auto& p : points)
    if (p.valid) valid.push_back(&p);
  if (valid.size() < 2)
    throw std::invalid_argument("confidence_interval: need >= 2 valid profile points");

  size_t peak = 0;
  for (size_t i = 1; i < valid.size(); ++i)
    if (valid[i]->lp > valid[peak]->lp) peak = i;

  const double threshold = -drop;
  auto interpolate = [&](const ProfilePoint* inner, const ProfilePoint* outer) {
    const double t = (threshold - inner->lp) / (outer->lp - inner->lp);
    return inner->theta + t * (outer->theta - inner->theta);
  };

  ConfidenceInterval ci;
  // walk down from the peak to the first bracketed crossing
  ci.lower.open = true;
  ci.lower.value = valid.front()->theta;
  for (size_t i = peak; i > 0; --i) {
    if (valid[i - 1]->lp < threshold && valid[i]->lp >= threshold) {
      ci.lower.value = interpolate(valid[i], valid[i - 1]);
      ci.lower.open = false;
      break;
    }
  }
  ci.upper.open = true;
  ci.upper.value = valid.back()->theta;
  for (size_t i = peak; i + 1 < valid.size(); ++i) {
    if (valid[i + 1]->lp < threshold && valid[i]->lp >= threshold) {
      ci.upper.value = interpolate(valid[i], valid[i + 1]);
      ci.upper.open = false;
      break;
    }
  }
  return ci;
}

PredictionBand prediction_band(const Observations& obs, const NoiseSpec& spec,
                               const ParamRanges& box, const PredictionBandOptions& opt,
                               std::uint64_t seed, const FitResult* fit) {
  const LogLikEval eval(obs, spec);
  FitResult local_fit = [&] {
    if (fit) return *fit;
    Rng fit_rng = make_rng(child_seed(seed, 0));
    return fit_mle(obs, spec, box, FitOptions{opt.fit_restarts}, fit_rng);
  }();

  // observation grid densified to opt.grid_step
  std::vector<double> ts;
  for (Eigen::Index i = 0; i < obs.grid.size(); ++i) ts.push_back(obs.grid[i]);
  for (double t = obs.grid.front(); t < obs.grid.back(); t += opt.grid_step)
    ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-9; }),
           ts.end());
  TimeGrid band_grid(Eigen::Map<const Eigen::VectorXd>(ts.data(),
                                                       static_cast<Eigen::Index>(ts.size())));

  Eigen::VectorXd lower = solve_vec(local_fit.mle, band_grid);
  Eigen::VectorXd upper = lower;

  Rng rng = make_rng(child_seed(seed, 101));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int retained = 0;
  for (int m = 0; m < opt.n_samples; ++m) {
    Eigen::Vector3d theta;
    for (int i = 0; i < 3; ++i) theta[i] = box.lo[i] + unif(rng) * (box.hi[i] - box.lo[i]);
    const LogisticParams p = LogisticParams::from_vec(theta);
    if (eval(p) - local_fit.loglik < -kRegion95Drop) continue;
    ++retained;
    const Eigen::VectorXd traj = solve_vec(p, band_grid);
    lower = lower.cwiseMin(traj);
    upper = upper.cwiseMax(traj);
  }
  if (retained < opt.min_retained)
    throw TooFewRetained("prediction_band: only " + std::to_string(retained) +
                         " of " + std::to_string(opt.n_samples) +
                         " samples passed the confidence-region threshold");

  const double scale = eval.noise_scale(local_fit.mle);
  const double sd = spec.family == NoiseSpec::Family::iid
                        ? std::sqrt(scale)
                        : std::sqrt(scale / (2.0 * spec.phi));
  lower.array() -= kNormal95 * sd;
  upper.array() += kNormal95 * sd;
  return PredictionBand{std::move(band_grid), std::move(lower), std::move(upper)};
}

}  // namespace oed
