#include "oed/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "oed/errors.hpp"
#include "oed/rng.hpp"

namespace oed {

namespace {

constexpr double kGapSlack = 1e-9;
constexpr double kTieTol = 1e-9;

bool lexicographically_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return a.size() < b.size();
}

}  // namespace

Design::Design(Eigen::VectorXd times, DesignConstraints constraints)
    : times_(std::move(times)), constraints_(constraints) {
  if (times_.size() == 0) throw std::invalid_argument("Design: empty time vector");
  std::sort(times_.data(), times_.data() + times_.size());
  if (times_[0] < constraints_.t_min - kGapSlack)
    throw InfeasibleConstraints("Design: first time below t_min");
  if (times_[times_.size() - 1] > constraints_.t_final + kGapSlack)
    throw InfeasibleConstraints("Design: last time beyond t_final");
  for (Eigen::Index i = 0; i + 1 < times_.size(); ++i)
    if (times_[i + 1] - times_[i] < constraints_.min_gap - kGapSlack)
      throw InfeasibleConstraints("Design: spacing below min_gap");
}

std::string to_csv_line(const Design& design) {
  std::string out;
  char buf[32];
  for (Eigen::Index i = 0; i < design.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", design.times()[i]);
    if (i) out += ',';
    out += buf;
  }
  return out;
}

CandidateGrid CandidateGrid::regular(const DesignConstraints& c) {
  if (!(c.min_gap > 0.0) || !(c.t_final > c.t_min))
    throw std::invalid_argument("CandidateGrid: need min_gap > 0 and t_final > t_min");
  std::vector<double> ts;
  for (double t = c.t_min; t <= c.t_final - c.min_gap + kGapSlack; t += c.min_gap)
    ts.push_back(t);
  ts.push_back(c.t_final);
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(ts.data(),
                                                        static_cast<Eigen::Index>(ts.size()));
  return CandidateGrid{TimeGrid(std::move(v)), c};
}

int SelectionVector::count() const {
  int n = 0;
  for (auto b : mask) n += b != 0;
  return n;
}

std::vector<int> SelectionVector::indices() const {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(mask.size()); ++i)
    if (mask[i]) idx.push_back(i);
  return idx;
}

SelectionVector SelectionVector::from_indices(const std::vector<int>& idx, int k) {
  SelectionVector s;
  s.mask.assign(static_cast<size_t>(k), 0);
  for (int i : idx) s.mask.at(static_cast<size_t>(i)) = 1;
  return s;
}

Design even_design(int n_s, double t_min, double t_final, double min_gap) {
  if (n_s < 1) throw std::invalid_argument("even_design: n_s must be >= 1");
  DesignConstraints c{t_min, t_final, min_gap};
  if (n_s == 1) return Design(Eigen::VectorXd::Constant(1, t_min), c);
  const double step = (t_final - t_min) / (n_s - 1);
  if (step < min_gap - kGapSlack)
    throw InfeasibleConstraints("even_design: spacing below min_gap");
  Eigen::VectorXd ts(n_s);
  for (int i = 0; i < n_s; ++i) ts[i] = t_min + step * i;
  ts[n_s - 1] = t_final;  // exact endpoint
  return Design(std::move(ts), c);
}

namespace {

// Maps unconstrained u in R^{n_s + 1} onto the feasible set: softmax(u)
// splits the spare budget S = t_final - t_min - (n_s - 1) min_gap across the
// n_s + 1 slots (before the first time, between neighbors, after the last).
Eigen::VectorXd slack_to_times(const Eigen::VectorXd& u, int n_s,
                               const DesignConstraints& c, double spare) {
  Eigen::VectorXd w = (u.array() - u.maxCoeff()).exp();
  w *= spare / w.sum();
  Eigen::VectorXd ts(n_s);
  double t = c.t_min + w[0];
  ts[0] = t;
  for (int i = 1; i < n_s; ++i) {
    t += c.min_gap + w[i];
    ts[i] = t;
  }
  return ts;
}

Eigen::VectorXd clip_to_constraints(Eigen::VectorXd ts, const DesignConstraints& c) {
  // numerical dust only; the parameterization is feasible by construction
  ts[0] = std::max(ts[0], c.t_min);
  ts[ts.size() - 1] = std::min(ts[ts.size() - 1], c.t_final);
  return ts;
}

}  // namespace

DesignResult optimize_fim_design(const LogisticParams& params, const NoiseModel& noise,
                                 int n_s, const DesignConstraints& constraints,
                                 const FimDesignOptions& opt) {
  if (n_s < 1) throw std::invalid_argument("optimize_fim_design: n_s must be >= 1");
  const double spare =
      constraints.t_final - constraints.t_min - (n_s - 1) * constraints.min_gap;
  if (spare < -kGapSlack)
    throw InfeasibleConstraints("optimize_fim_design: n_s times cannot fit in ["
                                "t_min, t_final] at min_gap spacing");

  if (n_s < 3) {
    // det of a rank-deficient 3x3 is identically zero; nothing to optimize
    std::cerr << "optimize_fim_design: warning: n_s < 3 makes det(F) identically zero\n";
    Eigen::VectorXd ts(n_s);
    for (int i = 0; i < n_s; ++i) ts[i] = constraints.t_min + i * constraints.min_gap;
    Design d(std::move(ts), constraints);
    return DesignResult{d, -std::numeric_limits<double>::infinity()};
  }

  // Spare budget ~ 0: the feasible set is the single min_gap-spaced grid.
  if (spare <= kGapSlack) {
    Eigen::VectorXd ts(n_s);
    for (int i = 0; i < n_s; ++i) ts[i] = constraints.t_min + i * constraints.min_gap;
    if (n_s > 1) ts[n_s - 1] = constraints.t_final;
    Design d(std::move(ts), constraints);
    return DesignResult{d, log_det_objective(fim(params, d.grid(), noise))};
  }

  auto objective_at = [&](const Eigen::VectorXd& ts) {
    return log_det_objective(fim(params, TimeGrid(ts), noise));
  };
  auto nm_objective = [&](const Eigen::VectorXd& u) {
    return -objective_at(slack_to_times(u, n_s, constraints, spare));
  };

  Rng rng = make_rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double best_value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_times;
  for (int k = 0; k < opt.restarts; ++k) {
    // log of Exp(1) draws -> softmax gives a uniform Dirichlet slack split,
    // i.e. a uniform random feasible start
    Eigen::VectorXd u0(n_s + 1);
    for (int i = 0; i <= n_s; ++i) u0[i] = std::log(-std::log(1.0 - unif(rng)));
    NelderMeadResult r = nelder_mead_minimize(nm_objective, u0, opt.nm);
    Eigen::VectorXd ts =
        clip_to_constraints(slack_to_times(r.x, n_s, constraints, spare), constraints);
    const double value = objective_at(ts);
    if (best_times.size() == 0 || value > best_value + kTieTol ||
        (value > best_value - kTieTol && lexicographically_less(ts, best_times))) {
      best_value = std::max(value, best_value);
      best_times = std::move(ts);
    }
  }

  Design d(std::move(best_times), constraints);
  return DesignResult{d, objective_at(d.times())};
}

namespace {

double selection_log_det(const SobolProfile& profile, const NoiseModel& noise,
                         const CandidateGrid& grid, const std::vector<int>& idx,
                         bool unit_correlation) {
  Eigen::VectorXd ts(static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) ts[static_cast<Eigen::Index>(i)] = grid.times[idx[i]];
  return log_det_objective(global_info(profile, TimeGrid(std::move(ts)), noise,
                                       unit_correlation));
}

// Ridge-stabilized objective so greedy growth can rank subsets of size < 3.
double selection_score(const SobolProfile& profile, const NoiseModel& noise,
                       const CandidateGrid& grid, const std::vector<int>& idx,
                       bool unit_correlation) {
  Eigen::Matrix3Xd s(3, static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i)
    s.col(static_cast<Eigen::Index>(i)) = profile.indices().col(
        profile.index_of(grid.times[idx[i]]));
  Eigen::Matrix3d g;
  if (std::holds_alternative<IidNoise>(noise)) {
    g = s * s.transpose();
  } else {
    Eigen::VectorXd ts(static_cast<Eigen::Index>(idx.size()));
    for (size_t i = 0; i < idx.size(); ++i)
      ts[static_cast<Eigen::Index>(i)] = grid.times[idx[i]];
    const auto& ou = std::get<OuNoise>(noise);
    const TimeGrid tg(std::move(ts));
    const CovMatrix cov =
        unit_correlation ? ou_correlation(ou.phi(), tg) : covariance(noise, tg);
    g = s * cov.solve(s.transpose());
  }
  const double ridge = 1e-9 * (1.0 + g.trace());
  return log_det(g + ridge * Eigen::Matrix3d::Identity());
}

double binomial_coefficient_capped(int k, int n, double cap) {
  double c = 1.0;
  for (int i = 1; i <= n; ++i) {
    c *= static_cast<double>(k - n + i) / i;
    if (c > cap) return cap + 1.0;
  }
  return c;
}

}  // namespace

DesignResult optimize_global_design(const SobolProfile& profile, const NoiseModel& noise,
                                    int n_s, const CandidateGrid& grid,
                                    const GlobalDesignOptions& opt) {
  const int k = static_cast<int>(grid.times.size());
  if (n_s < 1 || n_s > k)
    throw std::invalid_argument("optimize_global_design: need 1 <= n_s <= k");
  for (Eigen::Index i = 0; i < grid.times.size(); ++i)
    profile.index_of(grid.times[i]);  // TimeNotInGrid if the cache is stale

  auto objective = [&](const std::vector<int>& idx) {
    return selection_log_det(profile, noise, grid, idx, opt.unit_correlation);
  };

  const double n_subsets = binomial_coefficient_capped(k, n_s, 2e5);
  const bool exhaustive = opt.method == SelectionMethod::exhaustive ||
                          (opt.method == SelectionMethod::automatic && n_subsets <= 2e5);

  std::vector<int> best_idx;
  double best_value = -std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<int>& idx, double value) {
    // lexicographic index order equals lexicographic time order
    if (best_idx.empty() || value > best_value + kTieTol ||
        (value > best_value - kTieTol && idx < best_idx)) {
      best_value = std::max(value, best_value);
      best_idx = idx;
    }
  };

  if (exhaustive) {
    std::vector<int> idx(n_s);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      consider(idx, objective(idx));
      int pos = n_s - 1;
      while (pos >= 0 && idx[pos] == k - n_s + pos) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int j = pos + 1; j < n_s; ++j) idx[j] = idx[j - 1] + 1;
    }
  } else {
    auto swap_local_search = [&](std::vector<int> idx) {
      double cur = objective(idx);
      bool improved = true;
      while (improved) {
        improved = false;
        std::vector<std::uint8_t> selected(static_cast<size_t>(k), 0);
        for (int i : idx) selected[static_cast<size_t>(i)] = 1;
        for (int pos = 0; pos < n_s && !improved; ++pos) {
          for (int cand = 0; cand < k && !improved; ++cand) {
            if (selected[static_cast<size_t>(cand)]) continue;
            std::vector<int> trial = idx;
            trial[static_cast<size_t>(pos)] = cand;
            std::sort(trial.begin(), trial.end());
            const double val = objective(trial);
            if (val > cur + 1e-12) {
              idx = std::move(trial);
              cur = val;
              improved = true;
            }
          }
        }
      }
      consider(idx, cur);
    };

    // greedy forward growth on the ridge-stabilized score
    std::vector<int> greedy;
    std::vector<std::uint8_t> used(static_cast<size_t>(k), 0);
    for (int step = 0; step < n_s; ++step) {
      int arg = -1;
      double best_score = -std::numeric_limits<double>::infinity();
      for (int cand = 0; cand < k; ++cand) {
        if (used[static_cast<size_t>(cand)]) continue;
        std::vector<int> trial = greedy;
        trial.push_back(cand);
        std::sort(trial.begin(), trial.end());
        const double s = selection_score(profile, noise, grid, trial, opt.unit_correlation);
        if (s > best_score + 1e-15) {
          best_score = s;
          arg = cand;
        }
      }
      greedy.push_back(arg);
      used[static_cast<size_t>(arg)] = 1;
      std::sort(greedy.begin(), greedy.end());
    }
    swap_local_search(greedy);

    Rng rng = make_rng(opt.seed);
    std::vector<int> all(static_cast<size_t>(k));
    std::iota(all.begin(), all.end(), 0);
    for (int b = 0; b < opt.budget; ++b) {
      std::vector<int> perm = all;
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<int> idx(perm.begin(), perm.begin() + n_s);
      std::sort(idx.begin(), idx.end());
      swap_local_search(std::move(idx));
    }
  }

  Eigen::VectorXd ts(n_s);
  for (int i = 0; i < n_s; ++i) ts[i] = grid.times[best_idx[static_cast<size_t>(i)]];
  Design d(std::move(ts), grid.constraints);
  return DesignResult{d, best_value};
}

}  // namespace oed
