#include "oed/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "oed/errors.hpp"
#include "oed/parallel.hpp"
#include "oed/rng.hpp"

namespace oed {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[noreturn]] void config_fail(const std::string& field, const std::string& what) {
  throw ConfigError("config: " + field + ": " + what);
}

const json& require(const json& j, const std::string& key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) config_fail(ctx + "." + key, "missing required field");
  return *it;
}

double get_number(const json& j, const std::string& ctx) {
  if (!j.is_number()) config_fail(ctx, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& ctx) {
  if (!j.is_number_integer()) config_fail(ctx, "expected an integer");
  return j.get<int>();
}

std::string get_string(const json& j, const std::string& ctx) {
  if (!j.is_string()) config_fail(ctx, "expected a string");
  return j.get<std::string>();
}

NoiseModel parse_noise(const json& j, const std::string& ctx) {
  const std::string kind = get_string(require(j, "kind", ctx), ctx + ".kind");
  try {
    if (kind == "iid")
      return IidNoise(get_number(require(j, "sigma2", ctx), ctx + ".sigma2"));
    if (kind == "ou")
      return OuNoise(get_number(require(j, "phi", ctx), ctx + ".phi"),
                     get_number(require(j, "sigma2_ou", ctx), ctx + ".sigma2_ou"));
  } catch (const std::invalid_argument& e) {
    config_fail(ctx, e.what());
  }
  config_fail(ctx + ".kind", "expected 'iid' or 'ou'");
}

json noise_to_json(const NoiseModel& m) {
  if (const auto* iid = std::get_if<IidNoise>(&m))
    return {{"kind", "iid"}, {"sigma2", iid->sigma2()}};
  const auto& ou = std::get<OuNoise>(m);
  return {{"kind", "ou"}, {"phi", ou.phi()}, {"sigma2_ou", ou.sigma2_ou()}};
}

}  // namespace

Scenario parse_scenario_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  Scenario s;
  if (j.contains("name")) s.name = get_string(j["name"], "name");

  if (j.contains("truth")) {
    const json& t = j["truth"];
    try {
      s.truth = LogisticParams(get_number(require(t, "r", "truth"), "truth.r"),
                               get_number(require(t, "K", "truth"), "truth.K"),
                               get_number(require(t, "C0", "truth"), "truth.C0"));
    } catch (const std::invalid_argument& e) {
      config_fail("truth", e.what());
    }
  }

  s.generate = parse_noise(require(j, "generate", ""), "generate");

  {
    const json& a = require(j, "analysis", "");
    const std::string family = get_string(require(a, "family", "analysis"), "analysis.family");
    if (family != "iid" && family != "ou")
      config_fail("analysis.family", "expected 'iid' or 'ou'");
    double phi = 0.0;
    if (family == "ou") {
      if (a.contains("phi")) {
        phi = get_number(a["phi"], "analysis.phi");
      } else if (const auto* ou = std::get_if<OuNoise>(&s.generate)) {
        phi = ou->phi();
      } else {
        config_fail("analysis.phi", "required for OU analysis of IID-generated data");
      }
      if (const auto* ou = std::get_if<OuNoise>(&s.generate)) {
        if (std::abs(phi - ou->phi()) > 1e-12)
          config_fail("analysis.phi", "must match the generating phi (phi is known)");
      }
    }
    const json& scale = require(a, "scale", "analysis");
    if (scale.is_string() && scale.get<std::string>() == "profile") {
      s.analysis = family == "iid" ? NoiseSpec::iid_profiled() : NoiseSpec::ou_profiled(phi);
    } else if (scale.is_object() && scale.contains("fixed")) {
      const double v = get_number(scale["fixed"], "analysis.scale.fixed");
      if (!(v > 0.0)) config_fail("analysis.scale.fixed", "must be > 0");
      s.analysis = family == "iid" ? NoiseSpec::iid_fixed(v) : NoiseSpec::ou_fixed(phi, v);
    } else {
      config_fail("analysis.scale", "expected \"profile\" or {\"fixed\": value}");
    }
    const bool gen_ou = is_ou(s.generate);
    const bool ana_ou = s.analysis.family == NoiseSpec::Family::ou;
    if (gen_ou != ana_ou && !(gen_ou && !ana_ou))
      config_fail("analysis.family",
                  "only the generate-OU / analyze-IID misspecification is supported");
  }

  if (j.contains("design")) {
    const json& d = j["design"];
    const std::string source = get_string(require(d, "source", "design"), "design.source");
    if (source == "even") {
      s.design.source = DesignSource::even;
    } else if (source == "fim") {
      s.design.source = DesignSource::fim_optimized;
    } else if (source == "global") {
      s.design.source = DesignSource::global_optimized;
    } else if (source == "explicit") {
      s.design.source = DesignSource::explicit_times;
      const json& rows = require(d, "times", "design");
      if (!rows.is_array() || rows.empty()) config_fail("design.times", "expected rows");
      for (size_t r = 0; r < rows.size(); ++r) {
        const json& row = rows[r];
        if (!row.is_array() || row.empty())
          config_fail("design.times[" + std::to_string(r) + "]", "expected a time row");
        Eigen::VectorXd ts(static_cast<Eigen::Index>(row.size()));
        for (size_t i = 0; i < row.size(); ++i)
          ts[static_cast<Eigen::Index>(i)] =
              get_number(row[i], "design.times[" + std::to_string(r) + "]");
        s.design.explicit_rows.push_back(std::move(ts));
      }
    } else {
      config_fail("design.source", "expected even|fim|global|explicit");
    }
    if (d.contains("assumed")) s.design.assumed_noise = parse_noise(d["assumed"], "design.assumed");
    if (d.contains("restarts")) s.design.restarts = get_int(d["restarts"], "design.restarts");
    if (d.contains("budget")) s.design.budget = get_int(d["budget"], "design.budget");
    if (d.contains("unit_correlation")) {
      if (!d["unit_correlation"].is_boolean())
        config_fail("design.unit_correlation", "expected a boolean");
      s.design.unit_correlation = d["unit_correlation"].get<bool>();
    }
  }

  if (j.contains("ns")) s.ns = get_int(j["ns"], "ns");

  if (j.contains("sweep")) {
    const json& w = j["sweep"];
    const std::string axis = get_string(require(w, "axis", "sweep"), "sweep.axis");
    const json& values = require(w, "values", "sweep");
    if (!values.is_array() || values.empty()) config_fail("sweep.values", "expected values");
    for (size_t i = 0; i < values.size(); ++i)
      s.sweep.values.push_back(get_number(values[i], "sweep.values"));
    if (axis == "ns") {
      s.sweep.axis = SweepSpec::Axis::ns;
      for (double v : s.sweep.values)
        if (v != std::floor(v) || v < 1) config_fail("sweep.values", "ns must be integers >= 1");
    } else if (axis == "sigma2") {
      s.sweep.axis = SweepSpec::Axis::sigma2;
      const std::string coupling = w.contains("coupling")
                                       ? get_string(w["coupling"], "sweep.coupling")
                                       : "matched_variance";
      if (coupling == "matched_variance")
        s.sweep.coupling = SweepSpec::Sigma2Coupling::matched_variance;
      else if (coupling == "matched_sigma")
        s.sweep.coupling = SweepSpec::Sigma2Coupling::matched_sigma;
      else
        config_fail("sweep.coupling", "expected matched_variance|matched_sigma");
      if (s.analysis.scale_mode == NoiseSpec::ScaleMode::fixed)
        config_fail("sweep", "sigma2 sweep requires profiled analysis scale");
    } else if (axis == "phi") {
      s.sweep.axis = SweepSpec::Axis::phi;
      const json& var = require(w, "variance", "sweep");
      if (var.contains("stationary")) {
        s.sweep.phi_variance = SweepSpec::PhiVariance::constant_stationary;
        s.sweep.phi_variance_value = get_number(var["stationary"], "sweep.variance.stationary");
      } else if (var.contains("sigma_ou")) {
        s.sweep.phi_variance = SweepSpec::PhiVariance::constant_sigma_ou;
        s.sweep.phi_variance_value = get_number(var["sigma_ou"], "sweep.variance.sigma_ou");
      } else {
        config_fail("sweep.variance", "expected {\"stationary\": v} or {\"sigma_ou\": s}");
      }
      if (!is_ou(s.generate) || s.analysis.family != NoiseSpec::Family::ou)
        config_fail("sweep", "phi sweep requires OU generation and OU analysis");
    } else {
      config_fail("sweep.axis", "expected ns|sigma2|phi");
    }
  }

  if (j.contains("replicates")) s.replicates = get_int(j["replicates"], "replicates");
  if (s.replicates < 1) config_fail("replicates", "must be >= 1");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      config_fail("seed", "expected an integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }

  if (j.contains("constraints")) {
    const json& c = j["constraints"];
    if (c.contains("t_min")) s.constraints.t_min = get_number(c["t_min"], "constraints.t_min");
    if (c.contains("t_final"))
      s.constraints.t_final = get_number(c["t_final"], "constraints.t_final");
    if (c.contains("min_gap"))
      s.constraints.min_gap = get_number(c["min_gap"], "constraints.min_gap");
  }

  if (j.contains("ranges")) {
    const json& r = j["ranges"];
    Eigen::Vector3d lo, hi;
    for (int i = 0; i < 3; ++i) {
      const json& pair = require(r, kParamNames[i], "ranges");
      if (!pair.is_array() || pair.size() != 2)
        config_fail(std::string("ranges.") + kParamNames[i], "expected [lo, hi]");
      lo[i] = get_number(pair[0], "ranges");
      hi[i] = get_number(pair[1], "ranges");
    }
    try {
      s.design_ranges = ParamRanges(lo, hi);
    } catch (const std::invalid_argument& e) {
      config_fail("ranges", e.what());
    }
  }

  if (j.contains("fit")) {
    const json& f = j["fit"];
    if (f.contains("restarts")) s.fit.restarts = get_int(f["restarts"], "fit.restarts");
    if (f.contains("widen")) {
      const json& w = f["widen"];
      if (!w.is_array() || w.size() != 2) config_fail("fit.widen", "expected [lo, hi]");
      s.fit_widen_lo = get_number(w[0], "fit.widen");
      s.fit_widen_hi = get_number(w[1], "fit.widen");
    }
  }

  if (j.contains("profile")) {
    const json& p = j["profile"];
    if (p.contains("points_per_side"))
      s.profile.points_per_side = get_int(p["points_per_side"], "profile.points_per_side");
    if (p.contains("max_range_multiplier"))
      s.profile.max_range_multiplier =
          get_number(p["max_range_multiplier"], "profile.max_range_multiplier");
  }
  s.profile.fit_restarts = s.fit.restarts;

  if (j.contains("sobol")) {
    const json& o = j["sobol"];
    if (o.contains("n_base")) s.sobol.n_base = get_int(o["n_base"], "sobol.n_base");
    if (o.contains("seed")) s.sobol.seed = o["seed"].get<std::uint64_t>();
    if (o.contains("lhs")) {
      if (!o["lhs"].is_boolean()) config_fail("sobol.lhs", "expected a boolean");
      s.sobol.latin_hypercube = o["lhs"].get<bool>();
    }
  }

  if (j.contains("output")) s.output_dir = get_string(j["output"], "output");

  if (s.design.source == DesignSource::explicit_times && s.sweep.axis != SweepSpec::Axis::none)
    config_fail("sweep", "explicit time rows cannot be combined with a sweep");
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_json(ss.str());
}

namespace {

json scenario_to_json(const Scenario& s) {
  json d;
  switch (s.design.source) {
    case DesignSource::even: d["source"] = "even"; break;
    case DesignSource::fim_optimized: d["source"] = "fim"; break;
    case DesignSource::global_optimized: d["source"] = "global"; break;
    case DesignSource::explicit_times: {
      d["source"] = "explicit";
      json rows = json::array();
      for (const auto& row : s.design.explicit_rows) {
        json r = json::array();
        for (Eigen::Index i = 0; i < row.size(); ++i) r.push_back(row[i]);
        rows.push_back(std::move(r));
      }
      d["times"] = std::move(rows);
      break;
    }
  }
  if (s.design.assumed_noise) d["assumed"] = noise_to_json(*s.design.assumed_noise);
  d["restarts"] = s.design.restarts;
  d["budget"] = s.design.budget;
  d["unit_correlation"] = s.design.unit_correlation;

  json a;
  a["family"] = s.analysis.family == NoiseSpec::Family::iid ? "iid" : "ou";
  if (s.analysis.family == NoiseSpec::Family::ou) a["phi"] = s.analysis.phi;
  if (s.analysis.scale_mode == NoiseSpec::ScaleMode::profiled)
    a["scale"] = "profile";
  else
    a["scale"] = {{"fixed", s.analysis.fixed_scale}};

  json w;
  switch (s.sweep.axis) {
    case SweepSpec::Axis::none: break;
    case SweepSpec::Axis::ns: w["axis"] = "ns"; break;
    case SweepSpec::Axis::sigma2:
      w["axis"] = "sigma2";
      w["coupling"] = s.sweep.coupling == SweepSpec::Sigma2Coupling::matched_variance
                          ? "matched_variance"
                          : "matched_sigma";
      break;
    case SweepSpec::Axis::phi:
      w["axis"] = "phi";
      w["variance"] =
          s.sweep.phi_variance == SweepSpec::PhiVariance::constant_stationary
              ? json{{"stationary", s.sweep.phi_variance_value}}
              : json{{"sigma_ou", s.sweep.phi_variance_value}};
      break;
  }
  if (s.sweep.axis != SweepSpec::Axis::none) w["values"] = s.sweep.values;

  json out{
      {"name", s.name},
      {"truth", {{"r", s.truth.r}, {"K", s.truth.K}, {"C0", s.truth.C0}}},
      {"generate", noise_to_json(s.generate)},
      {"analysis", std::move(a)},
      {"design", std::move(d)},
      {"ns", s.ns},
      {"replicates", s.replicates},
      {"seed", s.seed},
      {"constraints",
       {{"t_min", s.constraints.t_min},
        {"t_final", s.constraints.t_final},
        {"min_gap", s.constraints.min_gap}}},
      {"ranges",
       {{"r", {s.design_ranges.lo[0], s.design_ranges.hi[0]}},
        {"K", {s.design_ranges.lo[1], s.design_ranges.hi[1]}},
        {"C0", {s.design_ranges.lo[2], s.design_ranges.hi[2]}}}},
      {"fit", {{"restarts", s.fit.restarts}, {"widen", {s.fit_widen_lo, s.fit_widen_hi}}}},
      {"profile",
       {{"points_per_side", s.profile.points_per_side},
        {"max_range_multiplier", s.profile.max_range_multiplier}}},
      {"sobol",
       {{"n_base", s.sobol.n_base},
        {"seed", s.sobol.seed},
        {"lhs", s.sobol.latin_hypercube}}},
  };
  if (!w.empty()) out["sweep"] = std::move(w);
  if (!s.output_dir.empty()) out["output"] = s.output_dir;
  return out;
}

struct AxisPoint {
  double value;
  int ns;
  NoiseModel gen;
  NoiseSpec analysis;
  Eigen::VectorXd design_times;
  double design_log_det;  // NaN when not optimized
};

NoiseModel sweep_generate_noise(const Scenario& s, double sigma2) {
  if (const auto* ou = std::get_if<OuNoise>(&s.generate)) {
    const double sigma2_ou = s.sweep.coupling == SweepSpec::Sigma2Coupling::matched_variance
                                 ? 2.0 * ou->phi() * sigma2
                                 : sigma2;
    return OuNoise(ou->phi(), sigma2_ou);
  }
  return IidNoise(sigma2);
}

std::string source_name(DesignSource s) {
  switch (s) {
    case DesignSource::even: return "even";
    case DesignSource::fim_optimized: return "fim";
    case DesignSource::global_optimized: return "global";
    default: return "explicit";
  }
}

struct RepRecord {
  std::array<double, 3> estimate;
  std::array<ConfidenceInterval, 3> ci;
  double loglik;
  double scale_hat;
  bool converged;
};

}  // namespace

SweepResult run_scenario(const Scenario& scenario, const RunOverrides& overrides) {
  Scenario s = scenario;
  if (overrides.replicates) s.replicates = *overrides.replicates;
  if (overrides.seed) s.seed = *overrides.seed;
  if (overrides.output_dir) s.output_dir = *overrides.output_dir;

  const ParamRanges fit_box = s.fit_box();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // Resolve the axis and, per point, the generating noise and analysis spec.
  std::string axis_name = "none";
  std::vector<AxisPoint> points;
  if (s.design.source == DesignSource::explicit_times) {
    axis_name = "ns";
    for (const auto& row : s.design.explicit_rows) {
      Design d(row, s.constraints);  // validates spacing
      points.push_back({static_cast<double>(row.size()), static_cast<int>(row.size()),
                        s.generate, s.analysis, d.times(), nan});
    }
  } else {
    std::vector<std::pair<double, int>> axis_values;  // (value, ns)
    switch (s.sweep.axis) {
      case SweepSpec::Axis::none:
        axis_values.push_back({static_cast<double>(s.ns), s.ns});
        break;
      case SweepSpec::Axis::ns:
        axis_name = "ns";
        for (double v : s.sweep.values) axis_values.push_back({v, static_cast<int>(v)});
        break;
      case SweepSpec::Axis::sigma2:
        axis_name = "sigma2";
        for (double v : s.sweep.values) axis_values.push_back({v, s.ns});
        break;
      case SweepSpec::Axis::phi:
        axis_name = "phi";
        for (double v : s.sweep.values) axis_values.push_back({v, s.ns});
        break;
    }

    // Sobol' indices are cached once on the candidate grid and shared by
    // every global design point.
    std::optional<SobolProfile> sobol_profile;
    if (s.design.source == DesignSource::global_optimized) {
      const CandidateGrid grid = CandidateGrid::regular(s.constraints);
      sobol_profile = total_effect_indices(s.design_ranges, grid.times, s.sobol);
    }

    for (size_t pi = 0; pi < axis_values.size(); ++pi) {
      const auto [value, ns] = axis_values[pi];
      NoiseModel gen = s.generate;
      NoiseSpec analysis = s.analysis;
      if (s.sweep.axis == SweepSpec::Axis::sigma2) {
        gen = sweep_generate_noise(s, value);
      } else if (s.sweep.axis == SweepSpec::Axis::phi) {
        const double sigma2_ou =
            s.sweep.phi_variance == SweepSpec::PhiVariance::constant_stationary
                ? 2.0 * value * s.sweep.phi_variance_value
                : s.sweep.phi_variance_value * s.sweep.phi_variance_value;
        gen = OuNoise(value, sigma2_ou);
        analysis = s.analysis.scale_mode == NoiseSpec::ScaleMode::profiled
                       ? NoiseSpec::ou_profiled(value)
                       : NoiseSpec::ou_fixed(value, sigma2_ou);
      }
      const NoiseModel assumed = s.design.assumed_noise ? *s.design.assumed_noise : gen;

      AxisPoint point{value, ns, gen, analysis, {}, nan};
      switch (s.design.source) {
        case DesignSource::even: {
          point.design_times =
              even_design(ns, s.constraints.t_min, s.constraints.t_final,
                          s.constraints.min_gap)
                  .times();
          break;
        }
        case DesignSource::fim_optimized: {
          FimDesignOptions opt;
          opt.restarts = s.design.restarts;
          opt.seed = child_seed(s.seed, 5000 + pi);
          const DesignResult r = optimize_fim_design(s.truth, assumed, ns, s.constraints, opt);
          point.design_times = r.design.times();
          point.design_log_det = r.log_det;
          break;
        }
        case DesignSource::global_optimized: {
          GlobalDesignOptions opt;
          opt.budget = s.design.budget;
          opt.seed = child_seed(s.seed, 6000 + pi);
          opt.unit_correlation = s.design.unit_correlation;
          const CandidateGrid grid = CandidateGrid::regular(s.constraints);
          const DesignResult r =
              optimize_global_design(*sobol_profile, assumed, ns, grid, opt);
          point.design_times = r.design.times();
          point.design_log_det = r.log_det;
          break;
        }
        case DesignSource::explicit_times:
          break;  // handled above
      }
      points.push_back(std::move(point));
    }
  }

  // Replicated inference, one deterministic child seed per (point, replicate).
  SweepResult result{axis_name, {}, s.replicates};
  std::vector<std::vector<RepRecord>> records(points.size());
  for (size_t pi = 0; pi < points.size(); ++pi) {
    const AxisPoint& point = points[pi];
    const TimeGrid grid{point.design_times};
    const std::uint64_t point_seed = child_seed(s.seed, 10000 + pi);
    std::vector<RepRecord>& recs = records[pi];
    recs.resize(static_cast<size_t>(s.replicates),
                RepRecord{{}, {}, 0.0, 0.0, false});

    parallel_for(
        s.replicates,
        [&](int r) {
          const std::uint64_t rep_seed = child_seed(point_seed, static_cast<std::uint64_t>(r));
          Rng gen_rng = make_rng(child_seed(rep_seed, 0));
          const Observations obs = synthesize(s.truth, point.gen, grid, gen_rng);

          Rng fit_rng = make_rng(child_seed(rep_seed, 1));
          const FitResult fit = fit_mle(obs, point.analysis, fit_box, s.fit, fit_rng);

          RepRecord rec{{}, {}, fit.loglik, fit.noise_scale_hat, fit.converged};
          for (int i = 0; i < 3; ++i) {
            rec.estimate[static_cast<size_t>(i)] = fit.mle[i];
            const ProfileResult prof = profile_parameter(
                obs, point.analysis, i, fit_box, s.profile, child_seed(rep_seed, 2), &fit);
            rec.ci[static_cast<size_t>(i)] = prof.ci;
          }
          recs[static_cast<size_t>(r)] = rec;
        },
        overrides.threads);

    SweepPointResult agg;
    agg.axis_value = point.value;
    agg.design_times = point.design_times;
    agg.design_log_det = point.design_log_det;
    int any_open = 0;
    for (const RepRecord& rec : recs) {
      bool open = false;
      for (int i = 0; i < 3; ++i) {
        auto& ps = agg.params[static_cast<size_t>(i)];
        ++ps.total;
        const ConfidenceInterval& ci = rec.ci[static_cast<size_t>(i)];
        if (ci.closed()) {
          ps.mean_width += ci.width();
          ++ps.closed;
        } else {
          open = true;
        }
      }
      any_open += open;
    }
    for (auto& ps : agg.params) ps.mean_width = ps.closed ? ps.mean_width / ps.closed : nan;
    agg.half_open_fraction = static_cast<double>(any_open) / s.replicates;
    result.points.push_back(std::move(agg));
  }

  if (!s.output_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(s.output_dir);

    {
      std::ofstream csv(fs::path(s.output_dir) / "replicates.csv");
      csv << "# schema: oed.replicates.v1\n";
      csv << "scenario,axis,axis_value,replicate,param,estimate,ci_lower,ci_upper,"
             "lower_open,upper_open,width,loglik,noise_scale_hat,fit_converged\n";
      for (size_t pi = 0; pi < points.size(); ++pi) {
        for (int r = 0; r < s.replicates; ++r) {
          const RepRecord& rec = records[pi][static_cast<size_t>(r)];
          for (int i = 0; i < 3; ++i) {
            const ConfidenceInterval& ci = rec.ci[static_cast<size_t>(i)];
            csv << s.name << ',' << axis_name << ',' << fmt(points[pi].value) << ',' << r
                << ',' << kParamNames[i] << ',' << fmt(rec.estimate[static_cast<size_t>(i)])
                << ',' << fmt(ci.lower.value) << ',' << fmt(ci.upper.value) << ','
                << (ci.lower.open ? 1 : 0) << ',' << (ci.upper.open ? 1 : 0) << ',';
            if (ci.closed()) csv << fmt(ci.width());
            csv << ',' << fmt(rec.loglik) << ',' << fmt(rec.scale_hat) << ','
                << (rec.converged ? 1 : 0) << '\n';
          }
        }
      }
    }

    {
      std::ofstream csv(fs::path(s.output_dir) / "designs.csv");
      csv << "# schema: oed.designs.v1\n";
      csv << "scenario,axis,axis_value,source,log_det,times\n";
      for (const auto& point : result.points) {
        csv << s.name << ',' << axis_name << ',' << fmt(point.axis_value) << ','
            << source_name(s.design.source) << ',';
        if (std::isfinite(point.design_log_det)) csv << fmt(point.design_log_det);
        csv << ',';
        for (Eigen::Index i = 0; i < point.design_times.size(); ++i) {
          if (i) csv << ';';
          csv << fmt(point.design_times[i]);
        }
        csv << '\n';
      }
    }

    {
      json summary;
      summary["schema"] = "oed.summary.v1";
      summary["scenario"] = scenario_to_json(s);
      summary["axis"] = axis_name;
      summary["replicates"] = s.replicates;
      json jpoints = json::array();
      for (const auto& point : result.points) {
        json params;
        for (int i = 0; i < 3; ++i) {
          const ParamStats& ps = point.params[static_cast<size_t>(i)];
          params[kParamNames[i]] = {
              {"mean_ci_width", std::isfinite(ps.mean_width) ? json(ps.mean_width) : json()},
              {"closed", ps.closed},
              {"total", ps.total}};
        }
        json times = json::array();
        for (Eigen::Index i = 0; i < point.design_times.size(); ++i)
          times.push_back(point.design_times[i]);
        jpoints.push_back({{"axis_value", point.axis_value},
                           {"design_times", std::move(times)},
                           {"design_log_det", std::isfinite(point.design_log_det)
                                                  ? json(point.design_log_det)
                                                  : json()},
                           {"params", std::move(params)},
                           {"half_open_fraction", point.half_open_fraction}});
      }
      summary["points"] = std::move(jpoints);
      std::ofstream out(fs::path(s.output_dir) / "summary.json");
      out << summary.dump(2) << '\n';
    }
  }

  return result;
}

SweepResult run_phi_sweep(const Scenario& s, const RunOverrides& overrides) {
  if (s.sweep.axis != SweepSpec::Axis::phi)
    throw ConfigError("run_phi_sweep: scenario must sweep phi");
  if (s.design.source != DesignSource::fim_optimized)
    throw ConfigError("run_phi_sweep: design source must be fim");
  return run_scenario(s, overrides);
}

SweepResult run_s3_perturbation(const Scenario& s, const RunOverrides& overrides) {
  if (s.design.source != DesignSource::explicit_times)
    throw ConfigError("run_s3_perturbation: design source must be explicit");
  return run_scenario(s, overrides);
}

void write_observations_csv(std::ostream& out, const Observations& obs) {
  out << "# schema: oed.observations.v1\n";
  out << "time,value\n";
  for (Eigen::Index i = 0; i < obs.grid.size(); ++i)
    out << fmt(obs.grid[i]) << ',' << fmt(obs.values[i]) << '\n';
}

Observations read_observations_csv(std::istream& in) {
  std::string line;
  std::vector<double> ts, vs;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "time,value")
        throw std::runtime_error("observations: expected 'time,value' header");
      header_seen = true;
      continue;
    }
    double t, v;
    if (std::sscanf(line.c_str(), "%lf,%lf", &t, &v) != 2)
      throw std::runtime_error("observations: bad row: " + line);
    ts.push_back(t);
    vs.push_back(v);
  }
  if (ts.empty()) throw std::runtime_error("observations: no data rows");
  return Observations(
      TimeGrid(Eigen::Map<const Eigen::VectorXd>(ts.data(), static_cast<Eigen::Index>(ts.size()))),
      Eigen::Map<const Eigen::VectorXd>(vs.data(), static_cast<Eigen::Index>(vs.size())));
}

void save_observations_csv(const std::string& path, const Observations& obs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  write_observations_csv(out, obs);
}

Observations load_observations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_observations_csv(in);
}

void write_profile_csv(std::ostream& out, const ProfileResult& profile) {
  out << "# schema: oed.profile.v1 param=" << kParamNames[profile.param_index] << "\n";
  out << "theta,lp,valid\n";
  for (const auto& p : profile.points)
    out << fmt(p.theta) << ',' << fmt(p.lp) << ',' << (p.valid ? 1 : 0) << '\n';
}

std::string ci_summary_json(const std::vector<ProfileResult>& profiles) {
  json out = json::array();
  for (const auto& p : profiles) {
    out.push_back({{"param", kParamNames[p.param_index]},
                   {"lower", p.ci.lower.value},
                   {"upper", p.ci.upper.value},
                   {"open_lower", p.ci.lower.open},
                   {"open_upper", p.ci.upper.open},
                   {"mle", p.mle[p.param_index]}});
  }
  return out.dump(2);
}

std::string fit_result_json(const FitResult& fit, const NoiseSpec& spec) {
  json out{{"mle", {{"r", fit.mle.r}, {"K", fit.mle.K}, {"C0", fit.mle.C0}}},
           {"loglik", fit.loglik},
           {"noise_scale_hat", fit.noise_scale_hat},
           {"converged", fit.converged},
           {"restarts", fit.restarts_used},
           {"family", spec.family == NoiseSpec::Family::iid ? "iid" : "ou"}};
  if (spec.family == NoiseSpec::Family::ou) out["phi"] = spec.phi;
  return out.dump(2);
}

std::string design_record_json(const std::string& kind, const NoiseModel& noise,
                               const DesignResult& result, std::uint64_t seed) {
  json times = json::array();
  for (Eigen::Index i = 0; i < result.design.size(); ++i)
    times.push_back(result.design.times()[i]);
  json out{{"kind", kind},
           {"noise", noise_to_json(noise)},
           {"n_s", result.design.size()},
           {"times", std::move(times)},
           {"logdet", result.log_det},
           {"seed", seed}};
  return out.dump(2);
}

}  // namespace oed
