#include "oed/sobol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oed/errors.hpp"
#include "oed/rng.hpp"

namespace oed {

SobolProfile::SobolProfile(TimeGrid grid, Eigen::Matrix3Xd indices, SobolOptions options,
                           ParamRanges ranges)
    : grid_(std::move(grid)),
      indices_(std::move(indices)),
      options_(options),
      ranges_(std::move(ranges)) {
  if (indices_.cols() != grid_.size())
    throw std::invalid_argument("SobolProfile: grid/index length mismatch");
}

Eigen::Index SobolProfile::index_of(double t) const {
  const Eigen::VectorXd& ts = grid_.times();
  // grid is sorted; binary search then exact-match check
  const double* begin = ts.data();
  const double* end = ts.data() + ts.size();
  const double* it = std::lower_bound(begin, end, t - 1e-9);
  if (it != end && std::abs(*it - t) <= 1e-9)
    return static_cast<Eigen::Index>(it - begin);
  throw TimeNotInGrid("SobolProfile: time " + std::to_string(t) +
                      " is not a cached grid point");
}

namespace {

// n x 3 uniform sample over the box; Latin-hypercube stratifies each column.
Eigen::MatrixX3d sample_matrix(const ParamRanges& ranges, int n, bool lhs, Rng& rng) {
  Eigen::MatrixX3d m(n, 3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int j = 0; j < 3; ++j) {
    if (lhs) {
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (int i = 0; i < n; ++i) {
        const double u = (perm[i] + unif(rng)) / n;
        m(i, j) = ranges.lo[j] + u * (ranges.hi[j] - ranges.lo[j]);
      }
    } else {
      for (int i = 0; i < n; ++i)
        m(i, j) = ranges.lo[j] + unif(rng) * (ranges.hi[j] - ranges.lo[j]);
    }
  }
  return m;
}

Eigen::VectorXd trajectory(const Eigen::RowVector3d& theta, const TimeGrid& grid) {
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index t = 0; t < grid.size(); ++t)
    out[t] = logistic_value(theta[0], theta[1], theta[2], grid[t]);
  return out;
}

}  // namespace

SobolProfile total_effect_indices(const ParamRanges& ranges, const TimeGrid& grid,
                                  const SobolOptions& options) {
  if (options.n_base < 256)
    throw std::invalid_argument("total_effect_indices: n_base must be >= 256");
  const int n = options.n_base;
  const Eigen::Index nt = grid.size();

  Rng rng = make_rng(options.seed);
  const Eigen::MatrixX3d a = sample_matrix(ranges, n, options.latin_hypercube, rng);
  const Eigen::MatrixX3d b = sample_matrix(ranges, n, options.latin_hypercube, rng);

  // Streaming accumulation in fixed row order: variance moments over A u B,
  // and the Jansen squared differences (f(A_j) - f(A_B^(i)_j))^2 per time.
  Eigen::VectorXd sum(nt), sum_sq(nt);
  sum.setZero();
  sum_sq.setZero();
  Eigen::Matrix3Xd diff_sq = Eigen::Matrix3Xd::Zero(3, nt);

  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd fa = trajectory(a.row(j), grid);
    const Eigen::VectorXd fb = trajectory(b.row(j), grid);
    sum += fa + fb;
    sum_sq += fa.cwiseAbs2() + fb.cwiseAbs2();
    for (int i = 0; i < 3; ++i) {
      Eigen::RowVector3d mixed = a.row(j);
      mixed[i] = b(j, i);
      const Eigen::VectorXd fm = trajectory(mixed, grid);
      diff_sq.row(i) += (fa - fm).cwiseAbs2().transpose();
    }
  }

  const double m = 2.0 * n;
  Eigen::Matrix3Xd s(3, nt);
  for (Eigen::Index t = 0; t < nt; ++t) {
    const double mean = sum[t] / m;
    const double var = (sum_sq[t] - m * mean * mean) / (m - 1.0);
    if (var < 1e-12)
      throw DegenerateVariance("total_effect_indices: output variance below 1e-12 at t=" +
                               std::to_string(grid[t]));
    for (int i = 0; i < 3; ++i) {
      const double raw = diff_sq(i, t) / (2.0 * n) / var;
      if (raw < -0.02 || raw > 1.02)
        throw std::runtime_error("total_effect_indices: estimate " + std::to_string(raw) +
                                 " outside [-0.02, 1.02]; increase n_base");
      s(i, t) = std::clamp(raw, 0.0, 1.0);
    }
  }
  return SobolProfile(grid, std::move(s), options, ranges);
}

namespace {

constexpr const char* kSobolHeader = "# oed sobol total-effect cache v1";

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_sobol_csv(std::ostream& out, const SobolProfile& p) {
  out << kSobolHeader << "\n";
  out << "# n_base=" << p.options().n_base << " seed=" << p.options().seed
      << " lhs=" << (p.options().latin_hypercube ? 1 : 0) << "\n";
  out << "# ranges";
  for (int i = 0; i < 3; ++i)
    out << " " << kParamNames[i] << "=[" << fmt(p.ranges().lo[i]) << ","
        << fmt(p.ranges().hi[i]) << "]";
  out << "\n";
  out << "time,S_r,S_K,S_C0\n";
  for (Eigen::Index t = 0; t < p.grid().size(); ++t) {
    out << fmt(p.grid()[t]);
    for (int i = 0; i < 3; ++i) out << "," << fmt(p.indices()(i, t));
    out << "\n";
  }
}

SobolProfile read_sobol_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSobolHeader)
    throw std::runtime_error("sobol cache: bad or missing version header");

  SobolOptions options;
  if (!std::getline(in, line))
    throw std::runtime_error("sobol cache: truncated header");
  {
    int lhs = 1;
    unsigned long long seed = 0;
    if (std::sscanf(line.c_str(), "# n_base=%d seed=%llu lhs=%d", &options.n_base, &seed,
                    &lhs) != 3)
      throw std::runtime_error("sobol cache: bad options line");
    options.seed = seed;
    options.latin_hypercube = lhs != 0;
  }

  Eigen::Vector3d lo, hi;
  if (!std::getline(in, line))
    throw std::runtime_error("sobol cache: truncated header");
  if (std::sscanf(line.c_str(), "# ranges r=[%lf,%lf] K=[%lf,%lf] C0=[%lf,%lf]", &lo[0],
                  &hi[0], &lo[1], &hi[1], &lo[2], &hi[2]) != 6)
    throw std::runtime_error("sobol cache: bad ranges line");

  if (!std::getline(in, line) || line != "time,S_r,S_K,S_C0")
    throw std::runtime_error("sobol cache: bad column header");

  std::vector<double> times;
  std::vector<Eigen::Vector3d> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double t, sr, sk, sc;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &sr, &sk, &sc) != 4)
      throw std::runtime_error("sobol cache: bad data row: " + line);
    times.push_back(t);
    rows.push_back({sr, sk, sc});
  }
  Eigen::VectorXd ts = Eigen::Map<const Eigen::VectorXd>(times.data(),
                                                         static_cast<Eigen::Index>(times.size()));
  Eigen::Matrix3Xd s(3, static_cast<Eigen::Index>(rows.size()));
  for (Eigen::Index i = 0; i < s.cols(); ++i) s.col(i) = rows[static_cast<size_t>(i)];
  return SobolProfile(TimeGrid(std::move(ts)), std::move(s), options, ParamRanges(lo, hi));
}

void save_sobol_csv(const std::string& path, const SobolProfile& profile) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("sobol cache: cannot open for write: " + path);
  write_sobol_csv(out, profile);
}

SobolProfile load_sobol_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("sobol cache: cannot open: " + path);
  return read_sobol_csv(in);
}

}  // namespace oed
