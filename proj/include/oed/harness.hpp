#ifndef OED_HARNESS_HPP
#define OED_HARNESS_HPP

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oed/design.hpp"
#include "oed/likelihood.hpp"
#include "oed/model.hpp"
#include "oed/noise.hpp"
#include "oed/profile.hpp"
#include "oed/sobol.hpp"

namespace oed {

enum class DesignSource { even, fim_optimized, global_optimized, explicit_times };

struct DesignSpec {
  DesignSource source = DesignSource::even;
  std::optional<NoiseModel> assumed_noise;  // optimizer's noise; generation truth if unset
  std::vector<Eigen::VectorXd> explicit_rows;
  int restarts = 50;
  int budget = 16;
  bool unit_correlation = false;
};

struct SweepSpec {
  enum class Axis { none, ns, sigma2, phi };
  enum class Sigma2Coupling { matched_variance, matched_sigma };
  enum class PhiVariance { constant_stationary, constant_sigma_ou };

  Axis axis = Axis::none;
  std::vector<double> values;
  Sigma2Coupling coupling = Sigma2Coupling::matched_variance;
  PhiVariance phi_variance = PhiVariance::constant_stationary;
  double phi_variance_value = 4.0;  // stationary variance, or sigma_ou, per mode
};

/// One declarative experiment: generating truth, analysis assumption
/// (possibly misspecified), design source, replication and seeding.
struct Scenario {
  std::string name = "scenario";
  LogisticParams truth{0.2, 50.0, 4.5};
  NoiseModel generate = IidNoise(9.0);
  NoiseSpec analysis = NoiseSpec::iid_profiled();
  DesignSpec design;
  int ns = 11;
  SweepSpec sweep;
  int replicates = 1000;
  std::uint64_t seed = 1;
  DesignConstraints constraints;
  ParamRanges design_ranges = ParamRanges::defaults();
  double fit_widen_lo = 0.5;
  double fit_widen_hi = 2.0;
  FitOptions fit;
  ProfileOptions profile;
  SobolOptions sobol;
  std::string output_dir;

  ParamRanges fit_box() const { return design_ranges.widened(fit_widen_lo, fit_widen_hi); }
};

/// Parse and validate a scenario file; ConfigError messages carry the
/// offending field. Load from a path or from JSON text.
Scenario load_scenario_file(const std::string& path);
Scenario parse_scenario_json(const std::string& json_text);

struct RunOverrides {
  std::optional<int> replicates;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  int threads = 0;  // 0: default
};

struct ParamStats {
  double mean_width = 0.0;  // over replicates whose CI is closed
  int closed = 0;
  int total = 0;
};

struct SweepPointResult {
  double axis_value = 0.0;
  Eigen::VectorXd design_times;
  double design_log_det = 0.0;  // NaN when the design was not optimized
  std::array<ParamStats, 3> params;
  double half_open_fraction = 0.0;  // replicates with any half-open CI
};

struct SweepResult {
  std::string axis;  // "none", "ns", "sigma2", "phi" or "row"
  std::vector<SweepPointResult> points;
  int replicates = 0;
};

/// Run a scenario end to end: per axis point resolve the design, then per
/// replicate synthesize, fit and profile all three parameters. Writes
/// replicates.csv, designs.csv and summary.json under the output dir (when
/// set). Byte-identical outputs for identical config and seed.
SweepResult run_scenario(const Scenario& s, const RunOverrides& overrides = {});

/// Mean-reversion sweep: per phi value the design is re-optimized against
/// the Fisher objective under OU noise, then replicated inference runs
/// under the matching truth. Expects sweep axis `phi`.
SweepResult run_phi_sweep(const Scenario& s, const RunOverrides& overrides = {});

/// Fixed list of explicit time rows (axis value = row length), replicated
/// inference on each. Expects an explicit-times design.
SweepResult run_s3_perturbation(const Scenario& s, const RunOverrides& overrides = {});

// --- small file helpers shared by the CLI ---

void write_observations_csv(std::ostream& out, const Observations& obs);
Observations read_observations_csv(std::istream& in);
void save_observations_csv(const std::string& path, const Observations& obs);
Observations load_observations_csv(const std::string& path);

void write_profile_csv(std::ostream& out, const ProfileResult& profile);
std::string ci_summary_json(const std::vector<ProfileResult>& profiles);
std::string fit_result_json(const FitResult& fit, const NoiseSpec& spec);
std::string design_record_json(const std::string& kind, const NoiseModel& noise,
                               const DesignResult& result, std::uint64_t seed);

}  // namespace oed

#endif  // OED_HARNESS_HPP
