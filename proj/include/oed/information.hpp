#ifndef OED_INFORMATION_HPP
#define OED_INFORMATION_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <limits>

#include "oed/model.hpp"
#include "oed/noise.hpp"
#include "oed/sobol.hpp"

namespace oed {

enum class InfoKind { fisher_iid, fisher_ou, global_iid, global_ou };

/// 3x3 symmetric PSD information matrix together with the design times it
/// was assembled on.
struct InfoMatrix {
  Eigen::Matrix3d m;
  InfoKind kind;
  Eigen::VectorXd times;
};

/// log det of a symmetric 3x3 matrix via Cholesky; -inf sentinel when the
/// factorization fails (singular or indefinite input).
inline double log_det(const Eigen::Matrix3d& m) {
  Eigen::LLT<Eigen::Matrix3d> llt(m);
  if (llt.info() != Eigen::Success)
    return -std::numeric_limits<double>::infinity();
  const double ld = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return std::isfinite(ld) ? ld : -std::numeric_limits<double>::infinity();
}

inline double log_det_objective(const InfoMatrix& info) { return log_det(info.m); }

/// Fisher information in log-parameters. With W_i = theta_i dC/dtheta_i
/// evaluated on the design times,
///   IID: F = (1/sigma2) W W',   OU: F = W Sigma^{-1} W',
/// where Sigma is the OU covariance on the same times (it carries the noise
/// scale, so no separate 1/sigma2 factor appears).
inline InfoMatrix fim(const LogisticParams& params, const TimeGrid& design,
                      const NoiseModel& noise) {
  Eigen::Matrix3Xd w = sensitivities_vec(params, design);
  for (int i = 0; i < 3; ++i) w.row(i) *= params[i];

  Eigen::Matrix3d f;
  InfoKind kind;
  if (const auto* iid = std::get_if<IidNoise>(&noise)) {
    f = w * w.transpose() / iid->sigma2();
    kind = InfoKind::fisher_iid;
  } else {
    const CovMatrix cov = covariance(noise, design);
    f = w * cov.solve(w.transpose());
    kind = InfoKind::fisher_ou;
  }
  f = 0.5 * (f + f.transpose()).eval();
  return InfoMatrix{f, kind, design.times()};
}

/// Global information from cached total-effect indices. With S_i the row of
/// indices of parameter i on the design times,
///   IID: G_ij = S_i S_j',   OU: G_ij = S_i Sigma^{-1} S_j'.
/// `unit_correlation` swaps the OU covariance for its unit-variance kernel.
/// Every design time must be cached exactly; throws TimeNotInGrid otherwise.
inline InfoMatrix global_info(const SobolProfile& profile, const TimeGrid& design,
                              const NoiseModel& noise, bool unit_correlation = false) {
  Eigen::Matrix3Xd s(3, design.size());
  for (Eigen::Index c = 0; c < design.size(); ++c)
    s.col(c) = profile.indices().col(profile.index_of(design[c]));

  Eigen::Matrix3d g;
  InfoKind kind;
  if (std::holds_alternative<IidNoise>(noise)) {
    g = s * s.transpose();
    kind = InfoKind::global_iid;
  } else {
    const auto& ou = std::get<OuNoise>(noise);
    const CovMatrix cov = unit_correlation ? ou_correlation(ou.phi(), design)
                                           : covariance(noise, design);
    g = s * cov.solve(s.transpose());
    kind = InfoKind::global_ou;
  }
  g = 0.5 * (g + g.transpose()).eval();
  return InfoMatrix{g, kind, design.times()};
}

}  // namespace oed

#endif  // OED_INFORMATION_HPP
