#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "oed/design.hpp"
#include "oed/harness.hpp"
#include "oed/likelihood.hpp"
#include "oed/model.hpp"
#include "oed/noise.hpp"
#include "oed/profile.hpp"
#include "oed/rng.hpp"
#include "oed/sobol.hpp"

namespace {

using namespace oed;

struct NoiseArgs {
  std::string kind = "iid";
  double sigma2 = 9.0;
  double phi = 0.02;
  double sigma2_ou = 0.36;

  void attach(CLI::App* cmd) {
    cmd->add_option("--noise", kind, "Noise model: iid or ou")
        ->check(CLI::IsMember({"iid", "ou"}));
    cmd->add_option("--sigma2", sigma2, "IID noise variance");
    cmd->add_option("--phi", phi, "OU mean-reversion rate");
    cmd->add_option("--sigma2-ou", sigma2_ou, "OU volatility squared");
  }

  NoiseModel model() const {
    if (kind == "iid") return IidNoise(sigma2);
    return OuNoise(phi, sigma2_ou);
  }
};

struct TruthArgs {
  double r = 0.2, K = 50.0, C0 = 4.5;

  void attach(CLI::App* cmd) {
    cmd->add_option("--r", r, "True growth rate");
    cmd->add_option("--K", K, "True carrying capacity");
    cmd->add_option("--C0", C0, "True initial population");
  }

  LogisticParams params() const { return LogisticParams(r, K, C0); }
};

struct AnalysisArgs {
  std::string family = "iid";
  double phi = 0.02;
  double fixed_scale = 0.0;  // 0: profiled

  void attach(CLI::App* cmd) {
    cmd->add_option("--noise", family, "Analysis noise family: iid or ou")
        ->check(CLI::IsMember({"iid", "ou"}));
    cmd->add_option("--phi", phi, "Known OU mean-reversion rate");
    cmd->add_option("--fixed-scale", fixed_scale,
                    "Pin the noise scale to this value instead of profiling it");
  }

  NoiseSpec spec() const {
    if (family == "iid")
      return fixed_scale > 0.0 ? NoiseSpec::iid_fixed(fixed_scale) : NoiseSpec::iid_profiled();
    return fixed_scale > 0.0 ? NoiseSpec::ou_fixed(phi, fixed_scale)
                             : NoiseSpec::ou_profiled(phi);
  }
};

Eigen::VectorXd parse_times(const std::string& csv) {
  std::vector<double> ts;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) ts.push_back(std::stod(tok));
  return Eigen::Map<const Eigen::VectorXd>(ts.data(), static_cast<Eigen::Index>(ts.size()));
}

void write_or_print(const std::optional<std::string>& path, const std::string& text) {
  if (path) {
    std::ofstream out(*path);
    if (!out) throw std::runtime_error("cannot open for write: " + *path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
  } else {
    std::cout << text << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observation-time design and identifiability analysis for the "
               "logistic growth model under IID and OU observation noise"};
  app.require_subcommand(1);

  // ---- simulate ----
  auto* simulate = app.add_subcommand("simulate", "Draw synthetic observations");
  TruthArgs sim_truth;
  NoiseArgs sim_noise;
  int sim_ns = 11;
  double sim_t_min = 0.0, sim_t_final = 80.0;
  std::string sim_times;
  std::uint64_t sim_seed = 1;
  std::optional<std::string> sim_out;
  sim_truth.attach(simulate);
  sim_noise.attach(simulate);
  simulate->add_option("--ns", sim_ns, "Number of evenly spaced observations");
  simulate->add_option("--t-min", sim_t_min, "First observation time");
  simulate->add_option("--t-final", sim_t_final, "Last observation time");
  simulate->add_option("--times", sim_times, "Explicit comma-separated times (overrides --ns)");
  simulate->add_option("--seed", sim_seed, "RNG seed");
  simulate->add_option("-o,--output", sim_out, "Output CSV (stdout when omitted)");

  // ---- fit ----
  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood fit of (r, K, C0)");
  AnalysisArgs fit_analysis;
  std::string fit_data;
  int fit_restarts = 50;
  std::uint64_t fit_seed = 1;
  std::optional<std::string> fit_out;
  fit_analysis.attach(fit_cmd);
  fit_cmd->add_option("--data", fit_data, "Observations CSV")->required();
  fit_cmd->add_option("--restarts", fit_restarts, "Multistart count");
  fit_cmd->add_option("--seed", fit_seed, "RNG seed");
  fit_cmd->add_option("-o,--output", fit_out, "Output JSON (stdout when omitted)");

  // ---- profile ----
  auto* prof_cmd = app.add_subcommand("profile", "Profile likelihoods, CIs and prediction band");
  AnalysisArgs prof_analysis;
  std::string prof_data, prof_dir = ".";
  int prof_restarts = 50;
  std::uint64_t prof_seed = 1;
  bool prof_band = false;
  prof_analysis.attach(prof_cmd);
  prof_cmd->add_option("--data", prof_data, "Observations CSV")->required();
  prof_cmd->add_option("--restarts", prof_restarts, "Multistart count for the MLE");
  prof_cmd->add_option("--seed", prof_seed, "RNG seed");
  prof_cmd->add_option("--out-dir", prof_dir, "Directory for profile CSVs and ci.json");
  prof_cmd->add_flag("--band", prof_band, "Also write the 95% prediction band (band.csv)");

  // ---- design-fim ----
  auto* dfim = app.add_subcommand("design-fim",
                                  "D-optimal observation times (Fisher information)");
  TruthArgs dfim_truth;
  NoiseArgs dfim_noise;
  int dfim_ns = 5, dfim_restarts = 50;
  double dfim_t_min = 0.0, dfim_t_final = 80.0, dfim_gap = 2.0;
  std::uint64_t dfim_seed = 1;
  std::optional<std::string> dfim_out;
  dfim_truth.attach(dfim);
  dfim_noise.attach(dfim);
  dfim->add_option("--ns", dfim_ns, "Number of observations");
  dfim->add_option("--restarts", dfim_restarts, "Multistart count");
  dfim->add_option("--t-min", dfim_t_min, "Earliest observation time");
  dfim->add_option("--t-final", dfim_t_final, "Latest observation time");
  dfim->add_option("--min-gap", dfim_gap, "Minimum spacing between observations");
  dfim->add_option("--seed", dfim_seed, "RNG seed");
  dfim->add_option("-o,--output", dfim_out,
                   "Output prefix; writes <prefix>.json and <prefix>.csv");

  // ---- design-global ----
  auto* dglob = app.add_subcommand("design-global",
                                   "Grid-restricted design (global information matrix)");
  NoiseArgs dglob_noise;
  std::string dglob_cache;
  int dglob_ns = 5, dglob_budget = 16, dglob_nbase = 1 << 13;
  double dglob_t_min = 0.0, dglob_t_final = 80.0, dglob_gap = 2.0;
  std::uint64_t dglob_seed = 1, dglob_sobol_seed = 0;
  std::string dglob_method = "auto";
  bool dglob_unit_corr = false;
  std::optional<std::string> dglob_out;
  dglob_noise.attach(dglob);
  dglob->add_option("--cache", dglob_cache,
                    "Sobol cache CSV (computed on the candidate grid when omitted)");
  dglob->add_option("--ns", dglob_ns, "Number of observations");
  dglob->add_option("--budget", dglob_budget, "Swap-phase restarts (heuristic)");
  dglob->add_option("--n-base", dglob_nbase, "Sobol base sample count when computing");
  dglob->add_option("--sobol-seed", dglob_sobol_seed, "Seed for the Sobol estimator");
  dglob->add_option("--t-min", dglob_t_min, "Earliest candidate time");
  dglob->add_option("--t-final", dglob_t_final, "Latest candidate time");
  dglob->add_option("--min-gap", dglob_gap, "Candidate grid step / spacing bound");
  dglob->add_option("--method", dglob_method, "auto, exhaustive or heuristic")
      ->check(CLI::IsMember({"auto", "exhaustive", "heuristic"}));
  dglob->add_flag("--unit-correlation", dglob_unit_corr,
                  "Weight by the unit-variance OU kernel instead of the covariance");
  dglob->add_option("--seed", dglob_seed, "RNG seed");
  dglob->add_option("-o,--output", dglob_out,
                    "Output prefix; writes <prefix>.json and <prefix>.csv");

  // ---- sobol-cache ----
  auto* scache = app.add_subcommand("sobol-cache",
                                    "Precompute total-effect Sobol' indices on a time grid");
  TruthArgs scache_truth;
  int scache_nbase = 1 << 13;
  double scache_t_min = 0.0, scache_t_final = 80.0, scache_step = 2.0;
  std::uint64_t scache_seed = 0;
  bool scache_plain = false;
  std::string scache_out = "sobol_cache.csv";
  std::optional<std::string> scache_sens_out;
  scache_truth.attach(scache);
  scache->add_option("--n-base", scache_nbase, "Base sample count");
  scache->add_option("--t-min", scache_t_min, "Grid start");
  scache->add_option("--t-final", scache_t_final, "Grid end");
  scache->add_option("--grid-step", scache_step, "Grid spacing");
  scache->add_option("--seed", scache_seed, "RNG seed");
  scache->add_flag("--plain-uniform", scache_plain,
                   "Plain uniform sampling instead of Latin hypercube");
  scache->add_option("-o,--output", scache_out, "Cache CSV path");
  scache->add_option("--sensitivities-out", scache_sens_out,
                     "Also write log-parameter model sensitivities on the same grid");

  // ---- scenario ----
  auto* scen = app.add_subcommand("scenario", "Run a declarative scenario file");
  auto* scen_run = scen->add_subcommand("run", "Run one scenario");
  std::string scen_file;
  std::optional<int> scen_reps;
  std::optional<std::uint64_t> scen_seed;
  std::optional<std::string> scen_out;
  int scen_threads = 0;
  scen_run->add_option("file", scen_file, "Scenario JSON file")->required();
  scen_run->add_option("--replicates", scen_reps, "Override replicate count");
  scen_run->add_option("--seed", scen_seed, "Override base seed");
  scen_run->add_option("--out", scen_out, "Override output directory");
  scen_run->add_option("--threads", scen_threads, "Worker threads (0: all cores)");
  scen->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      const Eigen::VectorXd times =
          sim_times.empty()
              ? even_design(sim_ns, sim_t_min, sim_t_final).times()
              : parse_times(sim_times);
      Rng rng = make_rng(sim_seed);
      const Observations obs =
          synthesize(sim_truth.params(), sim_noise.model(), TimeGrid(times), rng);
      if (sim_out) {
        save_observations_csv(*sim_out, obs);
      } else {
        write_observations_csv(std::cout, obs);
      }
    } else if (*fit_cmd) {
      const Observations obs = load_observations_csv(fit_data);
      const NoiseSpec spec = fit_analysis.spec();
      Rng rng = make_rng(fit_seed);
      FitOptions opt;
      opt.restarts = fit_restarts;
      const FitResult result =
          fit_mle(obs, spec, ParamRanges::defaults().widened(0.5, 2.0), opt, rng);
      write_or_print(fit_out, fit_result_json(result, spec));
    } else if (*prof_cmd) {
      const Observations obs = load_observations_csv(prof_data);
      const NoiseSpec spec = prof_analysis.spec();
      const ParamRanges box = ParamRanges::defaults().widened(0.5, 2.0);
      ProfileOptions opt;
      opt.fit_restarts = prof_restarts;
      Rng rng = make_rng(child_seed(prof_seed, 0));
      const FitResult fit = fit_mle(obs, spec, box, FitOptions{prof_restarts}, rng);
      std::filesystem::create_directories(prof_dir);
      std::vector<ProfileResult> profiles;
      for (int i = 0; i < 3; ++i) {
        profiles.push_back(profile_parameter(obs, spec, i, box, opt, prof_seed, &fit));
        std::ofstream csv(std::filesystem::path(prof_dir) /
                          (std::string("profile_") + kParamNames[i] + ".csv"));
        write_profile_csv(csv, profiles.back());
      }
      std::ofstream ci(std::filesystem::path(prof_dir) / "ci.json");
      ci << ci_summary_json(profiles) << '\n';
      if (prof_band) {
        const PredictionBand band =
            prediction_band(obs, spec, box, PredictionBandOptions{}, prof_seed, &fit);
        std::ofstream csv(std::filesystem::path(prof_dir) / "band.csv");
        csv << "# schema: oed.band.v1\ntime,lower,upper\n";
        char buf[96];
        for (Eigen::Index i = 0; i < band.grid.size(); ++i) {
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", band.grid[i], band.lower[i],
                        band.upper[i]);
          csv << buf;
        }
      }
    } else if (*dfim) {
      FimDesignOptions opt;
      opt.restarts = dfim_restarts;
      opt.seed = dfim_seed;
      const DesignResult result =
          optimize_fim_design(dfim_truth.params(), dfim_noise.model(), dfim_ns,
                              DesignConstraints{dfim_t_min, dfim_t_final, dfim_gap}, opt);
      const std::string record =
          design_record_json("fim", dfim_noise.model(), result, dfim_seed);
      if (dfim_out) {
        write_or_print(*dfim_out + ".json", record);
        write_or_print(*dfim_out + ".csv", to_csv_line(result.design));
      } else {
        std::cout << record << '\n' << to_csv_line(result.design) << '\n';
      }
    } else if (*dglob) {
      const DesignConstraints constraints{dglob_t_min, dglob_t_final, dglob_gap};
      const CandidateGrid grid = CandidateGrid::regular(constraints);
      const SobolProfile profile = [&] {
        if (!dglob_cache.empty()) return load_sobol_csv(dglob_cache);
        SobolOptions so;
        so.n_base = dglob_nbase;
        so.seed = dglob_sobol_seed;
        return total_effect_indices(ParamRanges::defaults(), grid.times, so);
      }();
      GlobalDesignOptions opt;
      opt.budget = dglob_budget;
      opt.seed = dglob_seed;
      opt.unit_correlation = dglob_unit_corr;
      opt.method = dglob_method == "exhaustive"  ? SelectionMethod::exhaustive
                   : dglob_method == "heuristic" ? SelectionMethod::heuristic
                                                 : SelectionMethod::automatic;
      const DesignResult result =
          optimize_global_design(profile, dglob_noise.model(), dglob_ns, grid, opt);
      const std::string record =
          design_record_json("global", dglob_noise.model(), result, dglob_seed);
      if (dglob_out) {
        write_or_print(*dglob_out + ".json", record);
        write_or_print(*dglob_out + ".csv", to_csv_line(result.design));
      } else {
        std::cout << record << '\n' << to_csv_line(result.design) << '\n';
      }
    } else if (*scache) {
      const CandidateGrid grid =
          CandidateGrid::regular(DesignConstraints{scache_t_min, scache_t_final, scache_step});
      SobolOptions so;
      so.n_base = scache_nbase;
      so.seed = scache_seed;
      so.latin_hypercube = !scache_plain;
      const SobolProfile profile =
          total_effect_indices(ParamRanges::defaults(), grid.times, so);
      save_sobol_csv(scache_out, profile);
      if (scache_sens_out) {
        const LogisticParams truth = scache_truth.params();
        std::ofstream out(*scache_sens_out);
        if (!out) throw std::runtime_error("cannot open for write: " + *scache_sens_out);
        out << "# schema: oed.fim-sensitivity.v1\ntime,w_r,w_K,w_C0\n";
        char buf[128];
        for (Eigen::Index i = 0; i < grid.times.size(); ++i) {
          const Eigen::Vector3d g = sensitivities(truth, grid.times[i]);
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", grid.times[i],
                        truth.r * g[0], truth.K * g[1], truth.C0 * g[2]);
          out << buf;
        }
      }
    } else if (*scen) {
      const Scenario scenario = load_scenario_file(scen_file);
      RunOverrides overrides;
      overrides.replicates = scen_reps;
      overrides.seed = scen_seed;
      overrides.output_dir = scen_out;
      overrides.threads = scen_threads;
      const SweepResult result = run_scenario(scenario, overrides);
      std::cout << "scenario '" << scenario.name << "': " << result.points.size()
                << " axis point(s), " << result.replicates << " replicate(s) each\n";
      for (const auto& p : result.points) {
        std::cout << "  " << result.axis << "=" << p.axis_value;
        for (int i = 0; i < 3; ++i) {
          const auto& ps = p.params[static_cast<size_t>(i)];
          std::cout << "  " << kParamNames[i] << ": width=";
          if (std::isfinite(ps.mean_width))
            std::cout << ps.mean_width;
          else
            std::cout << "n/a";
          std::cout << " (closed " << ps.closed << "/" << ps.total << ")";
        }
        std::cout << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
