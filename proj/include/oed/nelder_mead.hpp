#ifndef OED_NELDER_MEAD_HPP
#define OED_NELDER_MEAD_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oed {

struct NelderMeadOptions {
  double tol_f = 1e-10;     // relative spread of simplex values
  double tol_x = 1e-8;      // simplex diameter relative to |x_best|
  int max_evals = 2000;
  double initial_step = 0.1;  // per-coordinate: step * max(1, |x0_i|)
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int evals = 0;
  bool converged = false;
};

/// Downhill-simplex minimizer (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5). Deterministic given x0. Terminates when both the value
/// spread and the simplex diameter fall under tolerance, or on eval budget.
template <typename F>
NelderMeadResult nelder_mead_minimize(F&& f, const Eigen::VectorXd& x0,
                                      const NelderMeadOptions& opt = {}) {
  const int n = static_cast<int>(x0.size());
  NelderMeadResult res;
  res.x = x0;

  std::vector<Eigen::VectorXd> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  for (int i = 0; i < n; ++i)
    xs[i + 1][i] += opt.initial_step * std::max(1.0, std::abs(x0[i]));
  for (int i = 0; i <= n; ++i) fs[i] = f(xs[i]);
  res.evals = n + 1;

  std::vector<int> order(n + 1);
  auto sort_simplex = [&] {
    for (int i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
  };

  while (res.evals < opt.max_evals) {
    sort_simplex();
    const int best = order[0], worst = order[n], second_worst = order[n - 1];

    const double spread = std::abs(fs[worst] - fs[best]);
    double diam = 0.0;
    for (int i = 1; i <= n; ++i)
      diam = std::max(diam, (xs[order[i]] - xs[best]).cwiseAbs().maxCoeff());
    if (spread <= opt.tol_f * (std::abs(fs[best]) + std::abs(fs[worst]) + 1e-300) &&
        diam <= opt.tol_x * (1.0 + xs[best].cwiseAbs().maxCoeff())) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += xs[order[i]];
    centroid /= n;

    Eigen::VectorXd xr = centroid + (centroid - xs[worst]);
    const double fr = f(xr);
    ++res.evals;

    if (fr < fs[best]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = f(xe);
      ++res.evals;
      if (fe < fr) {
        xs[worst] = std::move(xe);
        fs[worst] = fe;
      } else {
        xs[worst] = std::move(xr);
        fs[worst] = fr;
      }
    } else if (fr < fs[second_worst]) {
      xs[worst] = std::move(xr);
      fs[worst] = fr;
    } else {
      const bool outside = fr < fs[worst];
      Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                   : Eigen::VectorXd(centroid - 0.5 * (centroid - xs[worst]));
      const double fc = f(xc);
      ++res.evals;
      if (fc < (outside ? fr : fs[worst])) {
        xs[worst] = std::move(xc);
        fs[worst] = fc;
      } else {
        // shrink toward the best vertex
        for (int i = 1; i <= n; ++i) {
          const int idx = order[i];
          xs[idx] = xs[best] + 0.5 * (xs[idx] - xs[best]);
          fs[idx] = f(xs[idx]);
        }
        res.evals += n;
      }
    }
  }

  sort_simplex();
  res.x = xs[order[0]];
  res.value = fs[order[0]];
  return res;
}

}  // namespace oed

#endif  // OED_NELDER_MEAD_HPP
