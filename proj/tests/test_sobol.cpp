#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oed/errors.hpp"
#include "oed/sobol.hpp"
#include "oracles.hpp"

using namespace oed;

namespace {

TimeGrid coarse_grid() { return TimeGrid{0.0, 8.0, 20.0, 40.0, 500.0}; }

SobolOptions opts(int n_base, std::uint64_t seed) {
  SobolOptions o;
  o.n_base = n_base;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_SUITE("sobol") {

TEST_CASE("boundary values at t = 0 and very late times") {
  const SobolProfile p =
      total_effect_indices(ParamRanges::defaults(), coarse_grid(), opts(1 << 13, 5));
  // at t = 0 the output is exactly C0
  CHECK(p.indices()(0, 0) == doctest::Approx(0.0).epsilon(0).scale(1).epsilon(0.02));
  CHECK(std::abs(p.indices()(0, 0)) <= 0.02);
  CHECK(std::abs(p.indices()(1, 0)) <= 0.02);
  CHECK(std::abs(p.indices()(2, 0) - 1.0) <= 0.02);
  // at t = 500 the output is K
  CHECK(std::abs(p.indices()(0, 4)) <= 0.02);
  CHECK(std::abs(p.indices()(1, 4) - 1.0) <= 0.02);
  CHECK(std::abs(p.indices()(2, 4)) <= 0.02);
}

TEST_CASE("profile shape across the growth window") {
  Eigen::VectorXd ts(41);
  for (int i = 0; i < 41; ++i) ts[i] = 2.0 * i;
  const SobolProfile p =
      total_effect_indices(ParamRanges::defaults(), TimeGrid(ts), opts(1 << 13, 9));
  const auto& s = p.indices();

  // S_r rises from ~0, peaks inside the growth phase, decays by t = 80
  int peak = 0;
  for (int i = 1; i < 41; ++i)
    if (s(0, i) > s(0, peak)) peak = i;
  CHECK(s(0, 0) <= 0.02);
  CHECK(ts[peak] > 4.0);
  CHECK(ts[peak] < 40.0);
  CHECK(s(0, peak) > 0.2);
  CHECK(s(0, 40) < 0.1);

  // S_K approaches 1 at late times and never wanders far above earlier
  CHECK(s(1, 40) > 0.9);
  for (int i = 25; i < 41; ++i) CHECK(s(1, i) >= s(1, 20) - 0.05);

  // S_C0 is 1 at t = 0 and decays
  CHECK(s(2, 0) > 0.98);
  CHECK(s(2, 40) < 0.1);
}

TEST_CASE("double-loop oracle agreement on the coarse grid") {
  const ParamRanges ranges = ParamRanges::defaults();
  const TimeGrid grid = coarse_grid();
  const SobolProfile p = total_effect_indices(ranges, grid, opts(1 << 13, 31));
  std::mt19937_64 rng(404);
  for (Eigen::Index t = 0; t < grid.size(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const double brute = oracles::double_loop_total_effect(
          [&](const Eigen::Vector3d& th) {
            return logistic_value(th[0], th[1], th[2], grid[t]);
          },
          ranges.lo, ranges.hi, i, 400, 400, rng);
      CHECK(std::abs(p.indices()(i, t) - std::clamp(brute, 0.0, 1.0)) < 0.03);
    }
  }
}

TEST_CASE("estimator consistency when doubling n_base") {
  const TimeGrid grid = coarse_grid();
  const SobolProfile a =
      total_effect_indices(ParamRanges::defaults(), grid, opts(1 << 13, 1));
  const SobolProfile b =
      total_effect_indices(ParamRanges::defaults(), grid, opts(1 << 14, 2));
  CHECK((a.indices() - b.indices()).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("seed determinism is bitwise") {
  const TimeGrid grid = coarse_grid();
  const SobolProfile a =
      total_effect_indices(ParamRanges::defaults(), grid, opts(1 << 10, 77));
  const SobolProfile b =
      total_effect_indices(ParamRanges::defaults(), grid, opts(1 << 10, 77));
  CHECK((a.indices() - b.indices()).norm() == 0.0);
}

TEST_CASE("degenerate variance is reported") {
  // a sliver of a box makes the output numerically parameter-insensitive
  const ParamRanges sliver({0.2, 50.0, 4.5}, {0.2 + 1e-13, 50.0 + 1e-13, 4.5 + 1e-13});
  CHECK_THROWS_AS(total_effect_indices(sliver, TimeGrid{0.0, 10.0}, opts(256, 1)),
                  DegenerateVariance);
}

TEST_CASE("n_base floor") {
  CHECK_THROWS_AS(total_effect_indices(ParamRanges::defaults(), coarse_grid(), opts(128, 1)),
                  std::invalid_argument);
}

TEST_CASE("cache round trip and exact lookup") {
  const SobolProfile p =
      total_effect_indices(ParamRanges::defaults(), coarse_grid(), opts(1 << 10, 12));
  std::stringstream ss;
  write_sobol_csv(ss, p);
  const SobolProfile q = read_sobol_csv(ss);
  CHECK((p.indices() - q.indices()).norm() == 0.0);
  CHECK((p.grid().times() - q.grid().times()).norm() == 0.0);
  CHECK(q.options().n_base == p.options().n_base);
  CHECK(q.options().seed == p.options().seed);
  CHECK(q.index_of(20.0) == 2);
  CHECK_THROWS_AS(q.index_of(21.0), TimeNotInGrid);
}

}  // TEST_SUITE
