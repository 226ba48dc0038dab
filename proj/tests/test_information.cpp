#include <doctest.h>

#include <cmath>

#include "oed/design.hpp"
#include "oed/information.hpp"
#include "oed/rng.hpp"
#include "oracles.hpp"

using namespace oed;

namespace {

const LogisticParams kTruth{0.2, 50.0, 4.5};

TimeGrid even_grid(int n, double t_final = 80.0) {
  Eigen::VectorXd ts(n);
  for (int i = 0; i < n; ++i) ts[i] = t_final * i / (n - 1);
  return TimeGrid(ts);
}

// Expected log-likelihood of data generated at kTruth, as a function of the
// log-parameters; its negated Hessian at the truth is the Fisher information.
double expected_loglik_logparams(const Eigen::Vector3d& log_theta, const TimeGrid& grid,
                                 const CovMatrix& cov) {
  const LogisticParams p(std::exp(log_theta[0]), std::exp(log_theta[1]),
                         std::exp(log_theta[2]));
  const Eigen::VectorXd d = solve_vec(p, grid) - solve_vec(kTruth, grid);
  return -0.5 * cov.invquad(d);
}

}  // namespace

TEST_SUITE("information") {

TEST_CASE("single design time gives a rank-1 matrix with zero determinant") {
  const TimeGrid grid{10.0};
  const InfoMatrix f = fim(kTruth, grid, IidNoise(9.0));
  CHECK(f.m.determinant() == doctest::Approx(0.0).epsilon(0).scale(1).epsilon(1e-9));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(f.m);
  CHECK(es.eigenvalues()[0] == doctest::Approx(0.0).epsilon(0).scale(1e-9));
  CHECK(es.eigenvalues()[1] == doctest::Approx(0.0).epsilon(0).scale(1e-9));
  CHECK(log_det_objective(f) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("decorrelation limit: fim(OU) approaches fim(IID)") {
  const TimeGrid grid = even_grid(8);
  const double s2 = 2.3;
  const double phi = 1e4;
  const InfoMatrix f_iid = fim(kTruth, grid, IidNoise(s2));
  const InfoMatrix f_ou = fim(kTruth, grid, OuNoise(phi, 2.0 * phi * s2));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(f_ou.m(i, j) == doctest::Approx(f_iid.m(i, j)).epsilon(1e-6));
}

TEST_CASE("fim matches the finite-difference Hessian of the expected log-likelihood") {
  const TimeGrid grid = even_grid(11);
  SUBCASE("IID") {
    const CovMatrix cov = covariance(IidNoise(9.0), grid);
    const Eigen::MatrixXd h = oracles::central_hessian(
        [&](const Eigen::VectorXd& lt) {
          return expected_loglik_logparams(lt, grid, cov);
        },
        kTruth.vec().array().log().matrix(), 2e-4);
    const InfoMatrix f = fim(kTruth, grid, IidNoise(9.0));
    const double scale = f.m.cwiseAbs().maxCoeff();
    CHECK(((-h) - f.m).cwiseAbs().maxCoeff() / scale < 1e-4);
  }
  SUBCASE("OU") {
    const OuNoise ou(0.02, 0.36);
    const CovMatrix cov = covariance(ou, grid);
    const Eigen::MatrixXd h = oracles::central_hessian(
        [&](const Eigen::VectorXd& lt) {
          return expected_loglik_logparams(lt, grid, cov);
        },
        kTruth.vec().array().log().matrix(), 2e-4);
    const InfoMatrix f = fim(kTruth, grid, ou);
    const double scale = f.m.cwiseAbs().maxCoeff();
    CHECK(((-h) - f.m).cwiseAbs().maxCoeff() / scale < 1e-4);
  }
}

TEST_CASE("fim symmetry and PSD") {
  Rng rng = make_rng(606);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const int n = 3 + static_cast<int>(unif(rng) * 8);
    Eigen::VectorXd ts(n);
    double t = 2.0 * unif(rng);
    for (int i = 0; i < n; ++i) {
      ts[i] = t;
      t += 2.0 + 8.0 * unif(rng);
    }
    const NoiseModel noise =
        k % 2 ? NoiseModel(OuNoise(0.02 + unif(rng), 0.2 + unif(rng)))
              : NoiseModel(IidNoise(0.5 + 9.0 * unif(rng)));
    const InfoMatrix f = fim(kTruth, TimeGrid(ts), noise);
    CHECK((f.m - f.m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * f.m.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(f.m);
    CHECK(es.eigenvalues()[0] >= -1e-9 * f.m.norm());
  }
}

TEST_CASE("adding a design point never lowers det(F) under IID noise") {
  Rng rng = make_rng(31);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    std::vector<double> base;
    double t = unif(rng) * 4.0;
    const int n = 3 + static_cast<int>(unif(rng) * 6);
    for (int i = 0; i < n; ++i) {
      base.push_back(t);
      t += 2.0 + 10.0 * unif(rng);
    }
    Eigen::VectorXd ts = Eigen::Map<const Eigen::VectorXd>(base.data(),
                                                           static_cast<Eigen::Index>(base.size()));
    const double before = fim(kTruth, TimeGrid(ts), IidNoise(4.0)).m.determinant();
    base.push_back(t + 2.0 + 10.0 * unif(rng));
    Eigen::VectorXd ts2 = Eigen::Map<const Eigen::VectorXd>(base.data(),
                                                            static_cast<Eigen::Index>(base.size()));
    const double after = fim(kTruth, TimeGrid(ts2), IidNoise(4.0)).m.determinant();
    CHECK(after >= before - 1e-9 * std::abs(before));
  }
}

TEST_CASE("IID fim scales as 1/sigma2 and the log-det shifts by -3 log c") {
  const TimeGrid grid = even_grid(9);
  const InfoMatrix f1 = fim(kTruth, grid, IidNoise(1.0));
  const InfoMatrix f9 = fim(kTruth, grid, IidNoise(9.0));
  CHECK((f1.m / 9.0 - f9.m).cwiseAbs().maxCoeff() < 1e-12 * f1.m.cwiseAbs().maxCoeff());
  CHECK(log_det_objective(f9) ==
        doctest::Approx(log_det_objective(f1) - 3.0 * std::log(9.0)).epsilon(1e-12));
}

TEST_CASE("optimal IID design is invariant to sigma2") {
  FimDesignOptions opt;
  opt.restarts = 20;
  opt.seed = 2024;
  const DesignConstraints c;
  const DesignResult a = optimize_fim_design(kTruth, IidNoise(1.0), 5, c, opt);
  const DesignResult b = optimize_fim_design(kTruth, IidNoise(9.0), 5, c, opt);
  CHECK((a.design.times() - b.design.times()).cwiseAbs().maxCoeff() < 0.2);
}

TEST_CASE("log_det_objective corner cases") {
  CHECK(log_det(Eigen::Matrix3d::Identity()) == 0.0);
  const double c = 3.7;
  Eigen::Matrix3d m;
  m << 4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 5.0;
  CHECK(log_det((c * m).eval()) == doctest::Approx(log_det(m) + 3.0 * std::log(c)).epsilon(1e-12));
}

TEST_CASE("global_info constructions") {
  // cache exact indices on a small grid: at t=0 they are (0, 0, 1)
  Eigen::Matrix3Xd s(3, 2);
  s.col(0) << 0.0, 0.0, 1.0;
  s.col(1) << 0.1, 0.9, 0.05;
  SobolOptions so;
  so.n_base = 256;
  const SobolProfile profile(TimeGrid{0.0, 40.0}, s, so, ParamRanges::defaults());

  SUBCASE("single time, OU kind: rank-1 with G_33 = 1 / Sigma_11") {
    const OuNoise ou(0.02, 0.36);
    const InfoMatrix g = global_info(profile, TimeGrid{0.0}, ou);
    const double sigma11 = ou.stationary_variance();
    CHECK(g.m(2, 2) == doctest::Approx(1.0 / sigma11).epsilon(1e-12));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != 2 || j != 2) CHECK(g.m(i, j) == 0.0);
    CHECK(log_det_objective(g) == -std::numeric_limits<double>::infinity());
  }
  SUBCASE("single time, IID kind: plain Gram") {
    const InfoMatrix g = global_info(profile, TimeGrid{0.0}, IidNoise(9.0));
    CHECK(g.m(2, 2) == 1.0);
    CHECK(g.m.sum() == 1.0);
  }
  SUBCASE("large-phi OU tends to (1/Sigma_11) times the IID Gram") {
    const double phi = 1e4;
    const double s2 = 2.0 * phi * 4.0;  // stationary variance 4
    const InfoMatrix g_ou = global_info(profile, TimeGrid{0.0, 40.0}, OuNoise(phi, s2));
    const InfoMatrix g_iid = global_info(profile, TimeGrid{0.0, 40.0}, IidNoise(4.0));
    CHECK((g_ou.m - g_iid.m / 4.0).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("missing design time") {
    CHECK_THROWS_AS(global_info(profile, TimeGrid{0.0, 17.0}, IidNoise(1.0)),
                    TimeNotInGrid);
  }
  SUBCASE("unit correlation switch rescales the OU weighting") {
    const OuNoise ou(0.05, 1.0);
    const InfoMatrix weighted = global_info(profile, TimeGrid{0.0, 40.0}, ou, false);
    const InfoMatrix unit = global_info(profile, TimeGrid{0.0, 40.0}, ou, true);
    // Sigma = v * kernel, so the two differ by exactly 1/v
    CHECK((weighted.m * ou.stationary_variance() - unit.m).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("design order does not matter once sorted by Design") {
  Eigen::VectorXd shuffled(4);
  shuffled << 40.0, 0.0, 80.0, 8.0;
  const Design d(shuffled, DesignConstraints{});
  Eigen::VectorXd sorted(4);
  sorted << 0.0, 8.0, 40.0, 80.0;
  CHECK((d.times() - sorted).norm() == 0.0);
  const InfoMatrix f = fim(kTruth, d.grid(), IidNoise(9.0));
  const InfoMatrix g = fim(kTruth, TimeGrid(sorted), IidNoise(9.0));
  CHECK((f.m - g.m).norm() == 0.0);
}

}  // TEST_SUITE
