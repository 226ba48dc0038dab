#ifndef OED_SOBOL_HPP
#define OED_SOBOL_HPP

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>

#include "oed/model.hpp"

namespace oed {

struct SobolOptions {
  int n_base = 1 << 13;        // base sample count per matrix
  bool latin_hypercube = true; // stratified sampling; plain uniform when false
  std::uint64_t seed = 0;
};

/// Total-effect Sobol' indices of the logistic output over a time grid,
/// cached so downstream design searches never re-run the Monte Carlo.
/// Row order (r, K, C0); column i belongs to grid[i]; values in [0, 1].
class SobolProfile {
 public:
  SobolProfile(TimeGrid grid, Eigen::Matrix3Xd indices, SobolOptions options,
               ParamRanges ranges);

  const TimeGrid& grid() const { return grid_; }
  const Eigen::Matrix3Xd& indices() const { return indices_; }
  const SobolOptions& options() const { return options_; }
  const ParamRanges& ranges() const { return ranges_; }

  /// Column index whose grid time matches `t` exactly (1e-9 slack for
  /// round-tripped values). Throws TimeNotInGrid otherwise.
  Eigen::Index index_of(double t) const;
  Eigen::Vector3d at(double t) const { return indices_.col(index_of(t)); }

 private:
  TimeGrid grid_;
  Eigen::Matrix3Xd indices_;
  SobolOptions options_;
  ParamRanges ranges_;
};

/// Jansen paired-matrix estimator of the total-effect indices
///   S_i(t) = E[V(f | theta_~i)] / V(f)
/// with uniform sampling over `ranges`. The same base matrices are reused
/// for every grid time, so the profile is smooth in t. Raw estimates must
/// land in [-0.02, 1.02]; they are clamped to [0, 1] on output. Throws
/// DegenerateVariance where V(f) < 1e-12. Deterministic given the seed.
SobolProfile total_effect_indices(const ParamRanges& ranges, const TimeGrid& grid,
                                  const SobolOptions& options);

/// Versioned cache format: header lines carrying options and ranges, then
/// one CSV row (time, S_r, S_K, S_C0) per grid time at full precision.
void write_sobol_csv(std::ostream& out, const SobolProfile& profile);
SobolProfile read_sobol_csv(std::istream& in);

void save_sobol_csv(const std::string& path, const SobolProfile& profile);
SobolProfile load_sobol_csv(const std::string& path);

}  // namespace oed

#endif  // OED_SOBOL_HPP
