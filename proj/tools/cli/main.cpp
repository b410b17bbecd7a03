#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scenery/correlations.hpp"
#include "scenery/inversion.hpp"
#include "scenery/io.hpp"
#include "scenery/reconstruct.hpp"
#include "selftest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scenery;

namespace {

constexpr int exit_config = 2;
constexpr int exit_missing = 3;
constexpr int exit_acceptance = 4;

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = ".";
  int workers = 1;
};

struct Run {
  json cfg;
  fs::path base;
  std::uint64_t seed = 0;
  std::string hash;
  fs::path out;
  int workers = 1;
};

Run prepare(const Common& c, bool needs_config = true) {
  Run r;
  if (needs_config) {
    if (c.config.empty()) throw ConfigError("--config is required");
    r.cfg = read_json_file(c.config);
    r.base = fs::path(c.config).parent_path();
  }
  r.seed = c.seed_given ? c.seed : r.cfg.value("seed", std::uint64_t{0});
  r.hash = config_hash(r.cfg);
  r.out = c.out;
  r.workers = c.workers < 1 ? 1 : c.workers;
  fs::create_directories(r.out);
  return r;
}

json header(const Run& r, const std::string& stage, const json& tolerances) {
  return {{"stage", stage}, {"seed", r.seed}, {"config_hash", r.hash}, {"tolerances", tolerances}};
}

std::string csv_header(const Run& r, const std::string& stage, const std::string& tolerances) {
  std::ostringstream os;
  os << "# stage=" << stage << " seed=" << r.seed << " config_hash=" << r.hash << " tolerances=" << tolerances << "\n";
  return os.str();
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  out << j.dump(2) << "\n";
  std::cout << "wrote " << p.string() << "\n";
}

// Scenery from an inline block or from a file holding a scenery or a
// reconstruction result.
Scenery load_scenery(const json& cfg, const std::string& key, const fs::path& base) {
  if (cfg.contains(key)) return scenery_from_json(cfg.at(key));
  const std::string file_key = key + "_file";
  if (!cfg.contains(file_key)) throw ConfigError("missing '" + key + "' or '" + file_key + "'");
  fs::path p = cfg.at(file_key).get<std::string>();
  if (p.is_relative()) p = base / p;
  json j = read_json_file(p);
  return scenery_from_json(j.contains("estimate") ? j.at("estimate") : j);
}

int cmd_simulate(const Common& c) {
  Run r = prepare(c);
  const StepLaw law = law_from_json(r.cfg.at("law"));
  const Scenery s = load_scenery(r.cfg, "scenery", r.base);
  const json& sched = r.cfg.at("schedule");
  const double dt = sched.at("dt").get<double>();
  const double horizon = sched.at("horizon").get<double>();
  if (!(dt > 0.0) || !(horizon > 0.0)) throw ConfigError("schedule: dt and horizon must be positive");
  const auto steps = static_cast<std::int64_t>(std::floor(horizon / dt + 1e-9));

  std::mt19937_64 rng(r.seed);
  std::uniform_real_distribution<double> uniform(0.0, two_pi);
  std::vector<double> x(static_cast<std::size_t>(law.dim()));
  for (double& v : x) v = uniform(rng);
  IncrementSampler step(law, dt);
  std::vector<double> w(x.size());

  const fs::path path = r.out / "trace.csv";
  std::ofstream out(path);
  out << csv_header(r, "simulate", "none") << "time,value\n";
  char buf[64];
  for (std::int64_t i = 0; i <= steps; ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) w[j] = wrap_angle(x[j]);
    std::snprintf(buf, sizeof buf, "%.10g,%d\n", static_cast<double>(i) * dt, s.contains(w) ? 1 : 0);
    out << buf;
    step.add_to(x, rng);
  }
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_fourier(const Common& c) {
  Run r = prepare(c);
  const Scenery s = load_scenery(r.cfg, "scenery", r.base);
  const int order = r.cfg.value("order", 1);
  const int cutoff = r.cfg.value("cutoff", 3);
  json j = header(r, "fourier", {{"closed_form", 0.0}});
  j["table"] = to_json(SpatialFourierTable::from_scenery(s, order, cutoff));
  write_json(r.out / "fourier.json", j);
  return 0;
}

int cmd_correlate(const Common& c) {
  Run r = prepare(c);
  const std::string method = r.cfg.value("method", std::string("exact"));
  const auto times = r.cfg.at("times").get<std::vector<TimeTuple>>();
  const fs::path path = r.out / "correlate.csv";
  std::ostringstream body;
  char buf[96];
  auto emit = [&](const TimeTuple& t, double v, double se) {
    std::string key;
    for (std::size_t i = 0; i < t.size(); ++i) key += (i ? ";" : "") + std::to_string(t[i]);
    std::snprintf(buf, sizeof buf, ",%.12g,%.6g\n", v, se);
    body << key << buf;
  };
  std::string tol;
  if (method == "trace") {
    fs::path p = r.cfg.at("trace_file").get<std::string>();
    if (p.is_relative()) p = r.base / p;
    Trace tr = read_trace_csv(p);
    const double gap = r.cfg.value("gap", 1.0);
    for (const TimeTuple& t : times) {
      CorrelationEstimate e = estimate_temporal_from_trace(tr.values, tr.dt, t, gap);
      emit(t, e.value, e.std_error);
    }
    tol = "4stderr";
  } else {
    const StepLaw law = law_from_json(r.cfg.at("law"));
    const Scenery s = load_scenery(r.cfg, "scenery", r.base);
    const int cutoff = r.cfg.value("cutoff", 60);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const TimeTuple& t = times[i];
      if (method == "exact") {
        ExactTemporal e = exact_temporal_fourier(law, s, t, cutoff);
        emit(t, e.value, e.truncation_bound);
        tol = "truncation_bound";
      } else if (method == "quadrature") {
        emit(t, exact_temporal_quadrature(law, s, t), 0.0);
        tol = "1e-10";
      } else if (method == "mc") {
        MonteCarloOptions mc;
        mc.blocks = r.cfg.value("blocks", mc.blocks);
        mc.seed = r.seed + i;
        mc.workers = r.workers;
        if (r.cfg.contains("gap")) mc.gap = r.cfg.at("gap").get<double>();
        CorrelationEstimate e = estimate_temporal(law, s, t, mc);
        emit(t, e.value, e.std_error);
        tol = "4stderr";
      } else {
        throw ConfigError("unknown method '" + method + "'");
      }
    }
  }
  std::ofstream out(path);
  out << csv_header(r, "correlate", tol) << "times,value,error\n" << body.str();
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_invert(const Common& c) {
  Run r = prepare(c);
  json cfg = r.cfg;
  cfg["seed"] = r.seed;
  cfg["workers"] = r.workers;
  if (!cfg.contains("mode")) cfg["mode"] = "inverted";
  PipelineConfig pc = pipeline_config_from_json(cfg, r.base);
  TemporalOracle oracle;
  if (pc.scenery && pc.temporal == TemporalSource::exact) {
    oracle = exact_temporal_oracle(pc.law, *pc.scenery, pc.oracle_cutoff);
  } else if (pc.scenery) {
    MonteCarloOptions mc;
    mc.blocks = pc.blocks;
    mc.seed = r.seed;
    mc.workers = r.workers;
    oracle = monte_carlo_temporal_oracle(pc.law, *pc.scenery, mc);
  } else {
    oracle = trace_temporal_oracle(pc.trace, pc.trace_dt, default_gap(pc.law));
  }
  InversionConfig inv = pc.inversion;
  inv.seed = r.seed;
  InversionResult res = invert_spatial_fourier(oracle, pc.law, inv);
  json j = header(r, "invert", {{"trust_condition", inv.trust_condition}});
  j["s0"] = res.s0;
  j["stages"] = json::array();
  for (const InversionStage& st : res.stages) {
    json e = {{"table", to_json(st.recovery.table)},
              {"condition", st.recovery.condition},
              {"trusted", st.recovery.trusted},
              {"residual", st.recovery.residual_norm},
              {"alpha", st.multipliers.alpha},
              {"max_moment_error", st.max_moment_error}};
    if (pc.scenery)
      e["relative_error"] = relative_error(
          st.recovery.table, SpatialFourierTable::from_scenery(*pc.scenery, st.recovery.table.order, st.recovery.table.cutoff));
    j["stages"].push_back(e);
  }
  write_json(r.out / "invert.json", j);
  return 0;
}

int cmd_reconstruct(const Common& c) {
  Run r = prepare(c);
  json cfg = r.cfg;
  cfg["seed"] = r.seed;
  cfg["workers"] = r.workers;
  PipelineConfig pc = pipeline_config_from_json(cfg, r.base);
  PipelineResult res = reconstruct(pc);
  json j = header(r, "reconstruct", {{"shift_grid", two_pi / pc.shift_resolution}, {"threshold", res.diagnostics["threshold"]}});
  j.update(to_json(res));
  write_json(r.out / "reconstruct.json", j);
  return 0;
}

int cmd_evaluate(const Common& c) {
  Run r = prepare(c);
  const Scenery a = load_scenery(r.cfg, "estimate", r.base);
  const Scenery b = load_scenery(r.cfg, "truth", r.base);
  const int resolution = r.cfg.value("resolution", 720);
  const bool reflect = r.cfg.value("allow_reflection", false);
  Alignment al = aligned_distance(a, b, resolution, reflect);
  json j = header(r, "evaluate", {{"shift_grid", two_pi / resolution}});
  j["aligned_distance"] = al.distance;
  j["shift"] = al.shift;
  j["reflected"] = al.reflected;
  j["measure_estimate"] = a.measure();
  j["measure_truth"] = b.measure();
  write_json(r.out / "evaluate.json", j);
  return 0;
}

int cmd_selftest(const Common& c, const std::vector<int>& only, bool corrupt) {
  selftest::Options opt;
  if (c.seed_given) opt.seed = c.seed;
  opt.workers = c.workers < 1 ? 1 : c.workers;
  opt.only = only;
  opt.corrupt_gamma = corrupt;
  auto results = selftest::run(opt);
  bool ok = true;
  json report = json::array();
  for (const auto& res : results) {
    std::cout << selftest::format_line(res) << std::endl;
    ok = ok && res.passed;
    report.push_back({{"id", res.id}, {"name", res.name}, {"passed", res.passed}, {"data", res.data}});
  }
  if (!c.out.empty() && c.out != ".") {
    fs::create_directories(c.out);
    write_json(fs::path(c.out) / "selftest.json", {{"seed", opt.seed}, {"criteria", report}});
  }
  std::cout << (ok ? "all criteria passed" : "some criteria FAILED") << std::endl;
  return ok ? 0 : exit_acceptance;
}

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "JSON configuration file");
  if (config_required) opt->required();
  sub->add_option_function<std::uint64_t>(
      "--seed", [&c](const std::uint64_t& v) { c.seed = v, c.seed_given = true; }, "64-bit seed");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenery reconstruction from traces of Levy processes on the torus"};
  app.require_subcommand(1);
  Common common;
  std::vector<int> only;
  bool corrupt = false;

  auto* sim = app.add_subcommand("simulate", "write the trace f(X_t) on a time grid");
  auto* fou = app.add_subcommand("fourier", "tabulate the spatial correlation transform");
  auto* cor = app.add_subcommand("correlate", "temporal correlations: exact, quadrature, mc or trace");
  auto* inv = app.add_subcommand("invert", "recover spatial transforms from temporal correlations");
  auto* rec = app.add_subcommand("reconstruct", "run the reconstruction pipeline");
  auto* eva = app.add_subcommand("evaluate", "aligned symmetric-difference distance of two sceneries");
  auto* st = app.add_subcommand("selftest", "run the acceptance suite");
  for (auto* s : {sim, fou, cor, inv, rec, eva}) add_common(s, common, true);
  add_common(st, common, false);
  st->add_option("--only", only, "criterion ids to run");
  st->add_flag("--corrupt-gamma-hat", corrupt, "use a wrong Brownian coefficient in the oracle check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (*sim) return cmd_simulate(common);
    if (*fou) return cmd_fourier(common);
    if (*cor) return cmd_correlate(common);
    if (*inv) return cmd_invert(common);
    if (*rec) return cmd_reconstruct(common);
    if (*eva) return cmd_evaluate(common);
    if (*st) return cmd_selftest(common, only, corrupt);
  } catch (const MissingArtifact& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_missing;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_config;
  }
  return exit_config;
}
