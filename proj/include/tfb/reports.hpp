#pragma once

// Scenario-driven front end: JSON configs select a grid, a field source
// (embedded profile, obstacle solve, or a binary dump), and a list of
// analyses; outputs are a field dump, frequency-curve CSVs, thin-set JSON,
// geometry CSVs and a machine-readable summary with one pass/fail entry per
// declared check.  Outputs are deterministic: identical configs produce
// byte-identical files.

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tfb/frequency.hpp"
#include "tfb/geometry.hpp"
#include "tfb/grid.hpp"
#include "tfb/homogeneous.hpp"
#include "tfb/solver.hpp"

namespace tfb {

using json = nlohmann::ordered_json;

/// Configuration errors map to the usage exit code (2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// --- configuration ---------------------------------------------------------------

struct FrequencyAnalysis {
  Vec center{0.0, 0.0, 0.0};
  std::vector<double> radii;
  std::optional<double> expect_lambda;  // declared check: |I - lambda| <= tol
  double tol = 0.03;
  double monotonicity_slack = 1e-3;
  bool check_monotone = false;
};

struct BlowupAnalysis {
  bool auto_center = true;  // free boundary node nearest to `center`
  Vec center{0.0, 0.0, 0.0};
  std::vector<double> radii;
  std::optional<double> expect_lambda;
  double lambda_tol = 0.05;
  std::optional<double> expect_direction_deg;
  double direction_tol_deg = 5.0;
  std::optional<double> residual_bound;
};

struct MinkowskiAnalysis {
  Vec window_center{0.0, 0.0, 0.0};
  double window_radius = 0.5;
  std::vector<double> radii;
  std::optional<double> ratio_min, ratio_max;  // declared band check
};

struct JonesAnalysis {
  bool auto_center = true;
  Vec center{0.0, 0.0, 0.0};
  std::vector<double> scales;
};

struct GeometryAnalysis {
  bool emit_sets = false;
  std::optional<MinkowskiAnalysis> minkowski;
  std::optional<JonesAnalysis> jones;
};

struct ScenarioConfig {
  int ambient_dim = 2;
  double half_width = 1.0;
  double spacing = 1.0 / 64;
  double weight_exponent = 0.0;

  enum class Source { Embed, Solve, Dump } source = Source::Embed;
  std::optional<HomogeneousProfile> profile;   // embed, or boundary trace for solve
  std::string dump_path;
  SolveParams solver;

  std::vector<FrequencyAnalysis> frequency;
  std::vector<BlowupAnalysis> blowups;
  GeometryAnalysis geometry;

  double contact_tol = -1.0;  // negative: extract_sets defaults
  double grad_tol = -1.0;
  std::string output_dir = "out";
};

namespace detail {

inline Vec parse_vec(const json& j, int expect_len, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) > kMaxDim || static_cast<int>(j.size()) <
      expect_len)
    throw ConfigError(std::string("config: bad vector for ") + what);
  Vec v{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

inline Family parse_family(const std::string& name) {
  if (name == "Phi") return Family::Phi;
  if (name == "Psi") return Family::Psi;
  if (name == "PsiReflected") return Family::PsiReflected;
  if (name == "Pi") return Family::Pi;
  throw ConfigError("config: unknown family '" + name + "'");
}

inline HomogeneousProfile parse_profile(const json& j, double s, int dim) {
  if (!j.contains("family") || !j.contains("m"))
    throw ConfigError("config: profile needs 'family' and 'm'");
  Vec e{1.0, 0.0, 0.0};
  if (j.contains("direction")) e = parse_vec(j["direction"], dim - 1, "profile direction");
  try {
    return make_profile(parse_family(j["family"].get<std::string>()), j["m"].get<int>(), s, e,
                        j.value("amplitude", 1.0), j.value("normalized", true));
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
}

}  // namespace detail

inline ScenarioConfig parse_config(const json& j) {
  ScenarioConfig cfg;
  try {
    if (!j.contains("grid")) throw ConfigError("config: missing 'grid'");
    const json& grid = j["grid"];
    cfg.ambient_dim = grid.value("ambient_dim", 2);
    cfg.half_width = grid.value("half_width", 1.0);
    cfg.spacing = grid.at("spacing").get<double>();
    cfg.weight_exponent = grid.value("a", 0.0);
    // validate early so bad grids exit with the usage code
    const GridSpec spec = [&] {
      try {
        return make_grid(cfg.ambient_dim, cfg.half_width, cfg.spacing, cfg.weight_exponent);
      } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("config: ") + err.what());
      }
    }();

    const json& field = j.at("field");
    const std::string source = field.value("source", "embed");
    if (source == "embed") {
      cfg.source = ScenarioConfig::Source::Embed;
      cfg.profile = detail::parse_profile(field.at("profile"), spec.s(), cfg.ambient_dim);
    } else if (source == "solve") {
      cfg.source = ScenarioConfig::Source::Solve;
      if (field.contains("profile"))
        cfg.profile = detail::parse_profile(field["profile"], spec.s(), cfg.ambient_dim);
      else if (field.contains("dump_path"))
        cfg.dump_path = field["dump_path"].get<std::string>();
      else
        throw ConfigError("config: solve needs boundary data ('profile' or 'dump_path')");
      if (field.contains("solver")) {
        const json& sv = field["solver"];
        cfg.solver.relaxation = sv.value("relaxation", cfg.solver.relaxation);
        cfg.solver.tolerance = sv.value("tolerance", cfg.solver.tolerance);
        cfg.solver.max_sweeps = sv.value("max_sweeps", 0);
        cfg.solver.energy_stride = sv.value("energy_stride", 1);
        const std::string order = sv.value("sweep_order", "lexicographic");
        if (order == "lexicographic") cfg.solver.order = SweepOrder::Lexicographic;
        else if (order == "red-black") cfg.solver.order = SweepOrder::RedBlack;
        else throw ConfigError("config: unknown sweep_order '" + order + "'");
        const std::string init = sv.value("init", "zero");
        if (init == "zero") cfg.solver.init = SolveInit::Zero;
        else if (init == "harmonic-extension") cfg.solver.init = SolveInit::HarmonicExtension;
        else throw ConfigError("config: unknown init '" + init + "'");
      }
    } else if (source == "dump") {
      cfg.source = ScenarioConfig::Source::Dump;
      cfg.dump_path = field.at("dump_path").get<std::string>();
    } else {
      throw ConfigError("config: unknown field source '" + source + "'");
    }

    if (j.contains("analyses")) {
      const json& an = j["analyses"];
      for (const json& fj : an.value("frequency", json::array())) {
        FrequencyAnalysis fa;
        fa.center = detail::parse_vec(fj.at("center"), cfg.ambient_dim - 1, "frequency center");
        fa.radii = fj.at("radii").get<std::vector<double>>();
        if (fj.contains("expect_lambda")) fa.expect_lambda = fj["expect_lambda"].get<double>();
        fa.tol = fj.value("tol", 0.03);
        fa.monotonicity_slack = fj.value("monotonicity_slack", 1e-3);
        fa.check_monotone = fj.value("check_monotone", false);
        cfg.frequency.push_back(fa);
      }
      for (const json& bj : an.value("blowup", json::array())) {
        BlowupAnalysis ba;
        if (bj.contains("center")) {
          ba.center = detail::parse_vec(bj["center"], cfg.ambient_dim - 1, "blowup center");
          ba.auto_center = bj.value("auto_center", true);
        }
        ba.radii = bj.at("radii").get<std::vector<double>>();
        if (bj.contains("expect_lambda")) ba.expect_lambda = bj["expect_lambda"].get<double>();
        ba.lambda_tol = bj.value("lambda_tol", 0.05);
        if (bj.contains("expect_direction_deg"))
          ba.expect_direction_deg = bj["expect_direction_deg"].get<double>();
        ba.direction_tol_deg = bj.value("direction_tol_deg", 5.0);
        if (bj.contains("residual_bound")) ba.residual_bound = bj["residual_bound"].get<double>();
        cfg.blowups.push_back(ba);
      }
      if (an.contains("geometry")) {
        const json& gj = an["geometry"];
        cfg.geometry.emit_sets = gj.value("sets", false);
        if (gj.contains("minkowski")) {
          const json& mj = gj["minkowski"];
          MinkowskiAnalysis ma;
          if (mj.contains("window_center"))
            ma.window_center =
                detail::parse_vec(mj["window_center"], cfg.ambient_dim - 1, "window center");
          ma.window_radius = mj.value("window_radius", 0.5);
          ma.radii = mj.at("radii").get<std::vector<double>>();
          if (mj.contains("ratio_min")) ma.ratio_min = mj["ratio_min"].get<double>();
          if (mj.contains("ratio_max")) ma.ratio_max = mj["ratio_max"].get<double>();
          cfg.geometry.minkowski = ma;
        }
        if (gj.contains("jones")) {
          const json& jj = gj["jones"];
          JonesAnalysis ja;
          if (jj.contains("center")) {
            ja.center = detail::parse_vec(jj["center"], cfg.ambient_dim - 1, "jones center");
            ja.auto_center = jj.value("auto_center", true);
          }
          ja.scales = jj.at("scales").get<std::vector<double>>();
          cfg.geometry.jones = ja;
        }
      }
    }

    if (j.contains("tolerances")) {
      cfg.contact_tol = j["tolerances"].value("contact_tol", -1.0);
      cfg.grad_tol = j["tolerances"].value("grad_tol", -1.0);
    }
    cfg.output_dir = j.value("output_dir", std::string("out"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
  return cfg;
}

inline ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    is >> j;
  } catch (const std::exception& err) {
    throw ConfigError(std::string("config: parse error: ") + err.what());
  }
  return parse_config(j);
}

// --- scenario execution -----------------------------------------------------------

struct CheckOutcome {
  std::string name;
  bool passed;
  double value;
  double bound;
  std::string detail;
};

struct ScenarioResult {
  std::vector<CheckOutcome> checks;
  json summary;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("emit_report: cannot write " + path.string());
  os << text;
}

inline json vec_json(const Vec& v, int dim) {
  json out = json::array();
  for (int i = 0; i < dim; ++i) out.push_back(v[i]);
  return out;
}

inline std::optional<Vec> nearest_fb(const ThinPointSet& sets, const Vec& target) {
  std::optional<Vec> best;
  double best_d = 1e300;
  for (const Vec& p : sets.fb_points()) {
    const double d = dist(p, target, sets.spec.dim());
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

}  // namespace detail

/// Runs a scenario end to end and writes its report files.  Numerical check
/// failures are reported in the result, not thrown.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  namespace fs = std::filesystem;
  const GridSpec spec =
      make_grid(cfg.ambient_dim, cfg.half_width, cfg.spacing, cfg.weight_exponent);
  const int dim = spec.dim();

  fs::create_directories(cfg.output_dir);
  ScenarioResult result;
  json& summary = result.summary;
  summary["report_version"] = 1;
  summary["grid"] = {{"ambient_dim", cfg.ambient_dim},
                     {"half_width", cfg.half_width},
                     {"spacing", cfg.spacing},
                     {"a", cfg.weight_exponent},
                     {"s", spec.s()}};

  // build the field
  ScalarField field(spec);
  if (cfg.source == ScenarioConfig::Source::Embed) {
    field = embed_profile(*cfg.profile, spec);
    summary["field"] = {{"source", "embed"}, {"family", family_name(cfg.profile->family)},
                        {"m", cfg.profile->m}, {"lambda", cfg.profile->lambda}};
  } else if (cfg.source == ScenarioConfig::Source::Dump) {
    field = read_field(cfg.dump_path);
    if (!(field.spec == spec)) throw ConfigError("config: dump grid mismatch");
    summary["field"] = {{"source", "dump"}, {"path", cfg.dump_path}};
  } else {
    SolveReport rep;
    if (cfg.profile) {
      const HomogeneousProfile p = *cfg.profile;
      auto solved = psor_solve(
          spec, [&](const Vec& x) { return profile_eval(p, x, dim); }, cfg.solver);
      field = std::move(solved.first);
      rep = solved.second;
    } else {
      const ScalarField data = read_field(cfg.dump_path);
      auto solved = psor_solve(
          spec, [&](const Vec& x) { return interpolate(data, x); }, cfg.solver);
      field = std::move(solved.first);
      rep = solved.second;
    }
    const ComplementarityReport comp = complementarity_report(field);
    summary["field"] = {{"source", "solve"},
                        {"converged", rep.converged},
                        {"sweeps", rep.sweeps_used},
                        {"final_update", rep.final_update},
                        {"relaxation", cfg.solver.relaxation},
                        {"tolerance", cfg.solver.tolerance},
                        {"energy_history", rep.energy_history},
                        {"complementarity",
                         {{"max_negative_trace", comp.max_negative_trace},
                          {"max_positive_flux", comp.max_positive_flux},
                          {"max_product", comp.max_product}}}};
    result.checks.push_back({"solver_converged", rep.converged,
                             static_cast<double>(rep.sweeps_used), 0.0,
                             "projected relaxation reached tolerance"});
  }
  write_field(field, (fs::path(cfg.output_dir) / "field.tfb").string());

  // thin point sets (computed on demand by several analyses)
  std::optional<ThinPointSet> sets;
  auto get_sets = [&]() -> const ThinPointSet& {
    if (!sets) sets = extract_sets(field, cfg.contact_tol, cfg.grad_tol);
    return *sets;
  };

  // frequency analyses
  json freq_summaries = json::array();
  for (std::size_t i = 0; i < cfg.frequency.size(); ++i) {
    const FrequencyAnalysis& fa = cfg.frequency[i];
    const FrequencyCurve curve =
        frequency_curve(field, fa.center, fa.radii, fa.monotonicity_slack);
    std::ostringstream csv;
    csv << "cx,cy";
    if (dim == 3) csv << ",cz";
    csv << ",r,H,D,E,I\n";
    for (std::size_t k = 0; k < curve.radii.size(); ++k) {
      for (int c = 0; c < dim - 1; ++c) csv << format_double(fa.center[c]) << ",";
      csv << format_double(0.0) << "," << format_double(curve.radii[k]) << ","
          << format_double(curve.H[k]) << "," << format_double(curve.D[k]) << ","
          << format_double(curve.E[k]) << "," << format_double(curve.I[k]) << "\n";
    }
    detail::write_text(fs::path(cfg.output_dir) / ("frequency_" + std::to_string(i) + ".csv"),
                       csv.str());

    json fj;
    fj["center"] = detail::vec_json(fa.center, dim - 1);
    fj["radii"] = curve.radii;
    fj["I"] = curve.I;
    fj["monotonicity_violations"] = curve.monotonicity_violations;
    fj["monotonicity_slack"] = fa.monotonicity_slack;
    if (fa.expect_lambda) {
      double worst = 0.0;
      for (double I : curve.I) worst = std::max(worst, std::abs(I - *fa.expect_lambda));
      fj["expect_lambda"] = *fa.expect_lambda;
      fj["tol"] = fa.tol;
      fj["max_deviation"] = worst;
      result.checks.push_back({"frequency_" + std::to_string(i) + "_lambda", worst <= fa.tol,
                               worst, fa.tol, "max |I - lambda| over radii"});
    }
    if (fa.check_monotone) {
      result.checks.push_back({"frequency_" + std::to_string(i) + "_monotone",
                               curve.monotonicity_violations == 0,
                               static_cast<double>(curve.monotonicity_violations),
                               fa.monotonicity_slack, "I nondecreasing within slack"});
    }
    freq_summaries.push_back(fj);
  }
  if (!freq_summaries.empty()) summary["frequency"] = freq_summaries;

  // blow-up analyses
  json blowup_summaries = json::array();
  for (const BlowupAnalysis& ba : cfg.blowups) {
    Vec center = ba.center;
    if (ba.auto_center) {
      const auto fb = detail::nearest_fb(get_sets(), ba.center);
      if (!fb) throw std::runtime_error("blowup analysis: no free boundary point detected");
      center = *fb;
    }
    const BlowupFit fit = blowup_fit(field, center, ba.radii, get_sets());
    json bj;
    bj["center"] = detail::vec_json(center, dim - 1);
    bj["lambda_estimate"] = fit.lambda_estimate;
    if (fit.classified) {
      bj["lambda_classified"] = fit.classified->lambda;
      bj["family"] = family_name(fit.classified->family);
      bj["direction"] = detail::vec_json(fit.direction, dim - 1);
      bj["amplitude"] = fit.amplitude;
      bj["residual_per_radius"] = fit.residual_per_radius;
      bj["residual"] = fit.residual;
    }
    bj["radii"] = fit.radii;
    if (ba.expect_lambda) {
      const double dev = std::abs(fit.lambda_estimate - *ba.expect_lambda);
      result.checks.push_back(
          {"blowup_lambda", dev <= ba.lambda_tol, dev, ba.lambda_tol, "|I(r_min) - lambda|"});
    }
    if (ba.expect_direction_deg && fit.classified) {
      const double got = std::atan2(fit.direction[1], fit.direction[0]) * 180.0 / M_PI;
      double dev = std::abs(got - *ba.expect_direction_deg);
      while (dev > 180.0) dev = std::abs(dev - 360.0);
      result.checks.push_back({"blowup_direction", dev <= ba.direction_tol_deg, dev,
                               ba.direction_tol_deg, "fit direction vs expected, degrees"});
    }
    if (ba.residual_bound && fit.classified) {
      double worst = 0.0;
      for (double r : fit.residual_per_radius) worst = std::max(worst, r);
      result.checks.push_back({"blowup_residual", worst <= *ba.residual_bound, worst,
                               *ba.residual_bound, "relative L2 profile mismatch"});
    }
    blowup_summaries.push_back(bj);
  }
  if (!blowup_summaries.empty()) summary["blowup"] = blowup_summaries;

  // geometry analyses
  if (cfg.geometry.emit_sets) {
    const ThinPointSet& tps = get_sets();
    json sj;
    sj["contact_tol"] = tps.contact_tol;
    sj["grad_tol"] = tps.grad_tol;
    auto indices = [&](const std::vector<unsigned char>& flags) {
      json arr = json::array();
      tps.for_each_plane_node([&](const Idx& idx) {
        if (!flags[tps.plane_index(idx)]) return;
        json node = json::array();
        for (int c = 0; c < dim - 1; ++c) node.push_back(idx[c]);
        arr.push_back(node);
      });
      return arr;
    };
    sj["contact"] = indices(tps.contact);
    sj["free_boundary"] = indices(tps.free_boundary);
    sj["nodal"] = indices(tps.nodal);
    detail::write_text(fs::path(cfg.output_dir) / "thin_sets.json", sj.dump(2) + "\n");
    summary["thin_sets"] = {{"contact", tps.contact_points().size()},
                            {"free_boundary", tps.fb_points().size()},
                            {"nodal", tps.nodal_points().size()},
                            {"contact_tol", tps.contact_tol},
                            {"grad_tol", tps.grad_tol}};
  }

  if (cfg.geometry.minkowski) {
    const MinkowskiAnalysis& ma = *cfg.geometry.minkowski;
    const auto rows =
        minkowski_profile(get_sets(), ma.window_center, ma.window_radius, ma.radii);
    std::ostringstream csv;
    csv << "r,volume,ratio\n";
    json ratios = json::array();
    bool in_band = true;
    for (const auto& row : rows) {
      csv << format_double(row.r) << "," << format_double(row.volume) << ","
          << format_double(row.ratio) << "\n";
      ratios.push_back(row.ratio);
      if (ma.ratio_min && row.ratio < *ma.ratio_min) in_band = false;
      if (ma.ratio_max && row.ratio > *ma.ratio_max) in_band = false;
    }
    detail::write_text(fs::path(cfg.output_dir) / "minkowski.csv", csv.str());
    summary["minkowski"] = {{"radii", ma.radii}, {"ratios", ratios}};
    if (ma.ratio_min || ma.ratio_max) {
      result.checks.push_back({"minkowski_band", in_band,
                               rows.empty() ? 0.0 : rows.front().ratio,
                               ma.ratio_max.value_or(0.0), "tube volume / r^2 within band"});
    }
  }

  if (cfg.geometry.jones) {
    const JonesAnalysis& ja = *cfg.geometry.jones;
    const DiscreteMeasure mu = measure_from_fb(get_sets());
    Vec center = ja.center;
    if (ja.auto_center) {
      const auto fb = detail::nearest_fb(get_sets(), ja.center);
      if (!fb) throw std::runtime_error("jones analysis: no free boundary point detected");
      center = *fb;
    }
    std::ostringstream csv;
    csv << "scale,beta,beta_sq\n";
    json per_scale = json::array();
    double total = 0.0;
    for (double scale : ja.scales) {
      const double b = beta_number(mu, center, scale, spec.thin_dim() - 1, dim).beta;
      csv << format_double(scale) << "," << format_double(b) << "," << format_double(b * b)
          << "\n";
      per_scale.push_back(b * b);
      total += b * b;
    }
    detail::write_text(fs::path(cfg.output_dir) / "jones.csv", csv.str());
    summary["jones"] = {{"center", detail::vec_json(center, dim - 1)},
                        {"scales", ja.scales},
                        {"beta_sq_per_scale", per_scale},
                        {"square_function", total}};
  }

  // summary with one entry per declared check
  json checks = json::array();
  for (const auto& c : result.checks)
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", c.value},
                      {"bound", c.bound},
                      {"detail", c.detail}});
  summary["checks"] = checks;
  summary["passed"] = result.all_passed();
  detail::write_text(fs::path(cfg.output_dir) / "summary.json", summary.dump(2) + "\n");
  return result;
}

}  // namespace tfb
