#ifndef OED_DESIGN_HPP
#define OED_DESIGN_HPP

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "oed/information.hpp"
#include "oed/model.hpp"
#include "oed/nelder_mead.hpp"
#include "oed/noise.hpp"
#include "oed/sobol.hpp"

namespace oed {

struct DesignConstraints {
  double t_min = 0.0;
  double t_final = 80.0;
  double min_gap = 2.0;  // minimum spacing between consecutive observations
};

/// Sorted vector of observation times respecting the constraint set
///   t_min <= t_1,  t_{s+1} - t_s >= min_gap,  t_{n_s} <= t_final.
class Design {
 public:
  Design(Eigen::VectorXd times, DesignConstraints constraints);

  const Eigen::VectorXd& times() const { return times_; }
  const DesignConstraints& constraints() const { return constraints_; }
  Eigen::Index size() const { return times_.size(); }
  TimeGrid grid() const { return TimeGrid(times_); }

 private:
  Eigen::VectorXd times_;
  DesignConstraints constraints_;
};

/// One line of comma-joined times at full precision.
std::string to_csv_line(const Design& design);

/// Potential observation times t_min, t_min + gap, t_min + 2 gap, ...,
/// with t_final appended (it replaces the last multiple when closer than
/// min_gap to it).
struct CandidateGrid {
  TimeGrid times;
  DesignConstraints constraints;

  static CandidateGrid regular(const DesignConstraints& c);
};

/// Binary selection over a candidate grid; exactly n_s entries set.
struct SelectionVector {
  std::vector<std::uint8_t> mask;

  int count() const;
  std::vector<int> indices() const;
  static SelectionVector from_indices(const std::vector<int>& idx, int k);
};

/// Arithmetic progression from t_min to t_final inclusive.
Design even_design(int n_s, double t_min, double t_final, double min_gap = 2.0);

struct DesignResult {
  Design design;
  double log_det;
};

struct FimDesignOptions {
  int restarts = 50;
  std::uint64_t seed = 0;
  NelderMeadOptions nm{1e-12, 1e-9, 4000, 0.7};
};

/// Continuous D-optimal design: maximize log det of the Fisher information
/// over feasible time vectors. Each restart runs a simplex search on an
/// unconstrained slack parameterization of the constraint set (softmax
/// allocation of the spare time budget), so every iterate is feasible.
/// Deterministic given the seed; ties within 1e-9 resolve to the
/// lexicographically smallest time vector.
DesignResult optimize_fim_design(const LogisticParams& params, const NoiseModel& noise,
                                 int n_s, const DesignConstraints& constraints,
                                 const FimDesignOptions& opt = {});

enum class SelectionMethod { automatic, exhaustive, heuristic };

struct GlobalDesignOptions {
  SelectionMethod method = SelectionMethod::automatic;
  int budget = 16;  // random restarts of the swap phase
  std::uint64_t seed = 0;
  bool unit_correlation = false;
};

/// Grid-restricted D-optimal design against the global (Sobol') information
/// matrix: choose n_s of the candidate times maximizing log det G.
/// Exhaustive when C(k, n_s) <= 2e5 (or forced); otherwise greedy forward
/// selection plus pairwise-swap local search with `budget` seeded restarts.
DesignResult optimize_global_design(const SobolProfile& profile, const NoiseModel& noise,
                                    int n_s, const CandidateGrid& grid,
                                    const GlobalDesignOptions& opt = {});

}  // namespace oed

#endif  // OED_DESIGN_HPP
