#ifndef OED_MODEL_HPP
#define OED_MODEL_HPP

#include <Eigen/Core>

#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace oed {

/// Closed-form logistic trajectory
///
///   C(t) = C0 K / ((K - C0) e^{-r t} + C0),
///
/// the explicit solution of dC/dt = r C (1 - C/K), C(0) = C0. Templated on
/// the scalar so expression-friendly types can flow through.
template <typename Scalar>
Scalar logistic_value(Scalar r, Scalar K, Scalar C0, Scalar t) {
  using std::exp;
  const Scalar decay = exp(-r * t);
  return C0 * K / ((K - C0) * decay + C0);
}

/// Growth-model parameter triple (r, K, C0), all strictly positive.
/// Index order 0:r, 1:K, 2:C0 is used everywhere downstream.
struct LogisticParams {
  double r;
  double K;
  double C0;

  LogisticParams(double r_, double K_, double C0_) : r(r_), K(K_), C0(C0_) {
    if (!(r > 0.0) || !(K > 0.0) || !(C0 > 0.0))
      throw std::invalid_argument("LogisticParams: r, K, C0 must be > 0");
  }

  double operator[](int i) const {
    switch (i) {
      case 0: return r;
      case 1: return K;
      default: return C0;
    }
  }

  Eigen::Vector3d vec() const { return {r, K, C0}; }

  static LogisticParams from_vec(const Eigen::Vector3d& v) {
    return LogisticParams(v[0], v[1], v[2]);
  }
};

inline constexpr const char* kParamNames[3] = {"r", "K", "C0"};

/// Closed positive box [lo_i, hi_i] per parameter; used both as a sampling
/// prior for global sensitivities and as an optimizer search box.
struct ParamRanges {
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;

  ParamRanges(const Eigen::Vector3d& lo_, const Eigen::Vector3d& hi_) : lo(lo_), hi(hi_) {
    for (int i = 0; i < 3; ++i) {
      if (!(lo[i] > 0.0) || !(lo[i] < hi[i]))
        throw std::invalid_argument(std::string("ParamRanges: need 0 < lo < hi for ") +
                                    kParamNames[i]);
    }
  }

  /// Default design box: r in [0.14, 0.26], K in [35, 65], C0 in [3.15, 5.85].
  static ParamRanges defaults() {
    return ParamRanges({0.14, 35.0, 3.15}, {0.26, 65.0, 5.85});
  }

  /// Box with lo scaled by `lo_factor` and hi by `hi_factor` (e.g. 0.5 / 2.0
  /// to widen a design box into a fitting box).
  ParamRanges widened(double lo_factor, double hi_factor) const {
    return ParamRanges(lo * lo_factor, hi * hi_factor);
  }

  bool contains(const Eigen::Vector3d& v) const {
    return (v.array() >= lo.array()).all() && (v.array() <= hi.array()).all();
  }

  double width(int i) const { return hi[i] - lo[i]; }
};

/// Strictly increasing vector of nonnegative observation times.
class TimeGrid {
 public:
  explicit TimeGrid(Eigen::VectorXd times) : times_(std::move(times)) {
    if (times_.size() == 0) throw std::invalid_argument("TimeGrid: empty");
    if (!(times_[0] >= 0.0)) throw std::invalid_argument("TimeGrid: times must be >= 0");
    for (Eigen::Index i = 0; i + 1 < times_.size(); ++i)
      if (!(times_[i + 1] > times_[i]))
        throw std::invalid_argument("TimeGrid: times must be strictly increasing");
  }

  TimeGrid(std::initializer_list<double> ts)
      : TimeGrid(Eigen::Map<const Eigen::VectorXd>(ts.begin(),
                                                   static_cast<Eigen::Index>(ts.size()))) {}

  const Eigen::VectorXd& times() const { return times_; }
  Eigen::Index size() const { return times_.size(); }
  double operator[](Eigen::Index i) const { return times_[i]; }
  double front() const { return times_[0]; }
  double back() const { return times_[times_.size() - 1]; }

 private:
  Eigen::VectorXd times_;
};

inline double solve(const LogisticParams& p, double t) {
  return logistic_value(p.r, p.K, p.C0, t);
}

/// Analytic partial derivatives (dC/dr, dC/dK, dC/dC0) of the closed form.
/// With D = (K - C0) e^{-rt} + C0:
///   dC/dr  = C0 K (K - C0) t e^{-rt} / D^2
///   dC/dK  = C0^2 (1 - e^{-rt})      / D^2
///   dC/dC0 = K^2 e^{-rt}             / D^2
inline Eigen::Vector3d sensitivities(const LogisticParams& p, double t) {
  const double decay = std::exp(-p.r * t);
  const double denom = (p.K - p.C0) * decay + p.C0;
  const double d2 = denom * denom;
  Eigen::Vector3d g;
  g[0] = p.C0 * p.K * (p.K - p.C0) * t * decay / d2;
  g[1] = p.C0 * p.C0 * (1.0 - decay) / d2;
  g[2] = p.K * p.K * decay / d2;
  return g;
}

inline Eigen::VectorXd solve_vec(const LogisticParams& p, const TimeGrid& grid) {
  return grid.times().unaryExpr(
      [&](double t) { return logistic_value(p.r, p.K, p.C0, t); });
}

/// 3 x n sensitivity matrix; row order (r, K, C0), column i evaluated at grid[i].
inline Eigen::Matrix3Xd sensitivities_vec(const LogisticParams& p, const TimeGrid& grid) {
  Eigen::Matrix3Xd out(3, grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) out.col(i) = sensitivities(p, grid[i]);
  return out;
}

}  // namespace oed

#endif  // OED_MODEL_HPP
