#include "scenery/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace scenery {

using nlohmann::json;

namespace {

std::vector<double> vec_of(const json& j, int dim, const char* what) {
  std::vector<double> v;
  if (j.is_number()) v.assign(static_cast<std::size_t>(dim), j.get<double>());
  else if (j.is_array()) v = j.get<std::vector<double>>();
  else throw ConfigError(std::string("expected a number or array for ") + what);
  if (static_cast<int>(v.size()) != dim) throw ConfigError(std::string("wrong length for ") + what);
  return v;
}

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const MissingArtifact&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

json to_json(const Scenery& s) {
  json boxes = json::array();
  for (const Box& b : s.boxes()) {
    json box = json::array();
    for (const Arc& a : b) box.push_back({a.lo, a.lo + a.length});
    boxes.push_back(box);
  }
  return {{"dim", s.dim()}, {"boxes", boxes}};
}

Scenery scenery_from_json(const json& j) {
  return guarded("scenery", [&] {
    if (j.contains("arcs")) {
      std::vector<std::vector<std::pair<double, double>>> boxes;
      for (const auto& a : j.at("arcs")) boxes.push_back({{a.at(0).get<double>(), a.at(1).get<double>()}});
      return Scenery::from_intervals(1, boxes);
    }
    const int dim = j.at("dim").get<int>();
    std::vector<std::vector<std::pair<double, double>>> boxes;
    for (const auto& b : j.at("boxes")) {
      std::vector<std::pair<double, double>> box;
      for (const auto& a : b) box.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
      boxes.push_back(std::move(box));
    }
    return Scenery::from_intervals(dim, boxes);
  });
}

json to_json(const StepLaw& law) {
  json j{{"dim", law.dim()}};
  if (law.brownian_part()) j["brownian"] = {{"drift", law.brownian_part()->drift}, {"sigma2", law.brownian_part()->sigma2}};
  if (law.jump_part()) {
    json mix = json::array();
    for (const JumpComponent& c : law.jump_part()->mixture)
      mix.push_back({{"weight", c.weight}, {"mean", c.mean}, {"var", c.var}});
    j["jumps"] = {{"rate", law.jump_part()->rate}, {"mixture", mix}};
  }
  return j;
}

StepLaw law_from_json(const json& j) {
  return guarded("law", [&] {
    const int dim = j.value("dim", 1);
    std::optional<Brownian> b;
    std::optional<JumpPart> jp;
    if (j.contains("brownian")) {
      const json& bj = j.at("brownian");
      b = Brownian{vec_of(bj.value("drift", json(0.0)), dim, "drift"), vec_of(bj.at("sigma2"), dim, "sigma2")};
    }
    if (j.contains("jumps")) {
      const json& jj = j.at("jumps");
      JumpPart part;
      part.rate = jj.at("rate").get<double>();
      for (const auto& c : jj.at("mixture"))
        part.mixture.push_back(JumpComponent{c.value("weight", 1.0), vec_of(c.value("mean", json(0.0)), dim, "mean"),
                                             vec_of(c.at("var"), dim, "var")});
      jp = part;
    }
    return StepLaw(dim, b, jp);
  });
}

json to_json(const SpatialFourierTable& t) {
  json entries = json::array();
  for (std::size_t i = 0; i < t.indices.size(); ++i)
    entries.push_back({{"k", t.indices[i]}, {"re", t.values[i].real()}, {"im", t.values[i].imag()}});
  return {{"order", t.order}, {"cutoff", t.cutoff}, {"dim", t.dim}, {"entries", entries}};
}

SpatialFourierTable fourier_table_from_json(const json& j) {
  return guarded("fourier table", [&] {
    SpatialFourierTable t =
        SpatialFourierTable::zeros(j.at("order").get<int>(), j.value("dim", 1), j.at("cutoff").get<int>());
    for (const auto& e : j.at("entries")) {
      auto k = e.at("k").get<std::vector<int>>();
      t.values[t.position(k)] = Complex(e.at("re").get<double>(), e.value("im", 0.0));
    }
    return t;
  });
}

Trace read_trace_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw MissingArtifact(p);
  Trace tr;
  std::string line;
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("time", 0) == 0) continue;
    std::istringstream ss(line);
    double t, v;
    char comma;
    if (!(ss >> t >> comma >> v) || comma != ',') throw ConfigError("trace: bad row '" + line + "'");
    times.push_back(t);
    tr.values.push_back(v);
  }
  if (times.size() < 2) throw ConfigError("trace: fewer than two samples in " + p.string());
  tr.dt = times[1] - times[0];
  if (!(tr.dt > 0.0)) throw ConfigError("trace: times must increase");
  return tr;
}

json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw MissingArtifact(p);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

PipelineConfig pipeline_config_from_json(const json& j, const std::filesystem::path& base) {
  PipelineConfig c;
  c.law = law_from_json(j.at("law"));
  guarded("pipeline", [&] {
    if (j.contains("scenery")) c.scenery = scenery_from_json(j.at("scenery"));
    if (j.contains("trace_file")) {
      std::filesystem::path p = j.at("trace_file").get<std::string>();
      if (p.is_relative() && !base.empty()) p = base / p;
      Trace tr = read_trace_csv(p);
      c.trace = std::move(tr.values);
      c.trace_dt = tr.dt;
    }
    c.m = j.value("m", c.m);
    const std::string mode = j.value("mode", std::string("exact"));
    if (mode == "exact") c.mode = ReconstructionMode::exact;
    else if (mode == "inverted") c.mode = ReconstructionMode::inverted;
    else if (mode == "symmetric") c.mode = ReconstructionMode::symmetric;
    else throw ConfigError("unknown mode '" + mode + "'");
    c.seed = j.value("seed", c.seed);
    c.budget = j.value("budget", c.budget);
    c.shift_resolution = j.value("shift_resolution", c.shift_resolution);
    c.allow_reflection = j.value("allow_reflection", c.allow_reflection);
    c.distinctness_t = j.value("distinctness_t", c.distinctness_t);
    c.distinctness_margin = j.value("distinctness_margin", c.distinctness_margin);
    c.distinctness_cutoff = j.value("distinctness_cutoff", c.distinctness_cutoff);
    c.oracle_cutoff = j.value("oracle_cutoff", c.oracle_cutoff);
    c.blocks = j.value("blocks", c.blocks);
    c.workers = j.value("workers", c.workers);
    const std::string temporal = j.value("temporal", std::string("exact"));
    if (temporal == "exact") c.temporal = TemporalSource::exact;
    else if (temporal == "mc") c.temporal = TemporalSource::monte_carlo;
    else throw ConfigError("unknown temporal source '" + temporal + "'");
    const std::string pairs = j.value("pair_source", std::string("direct"));
    if (pairs == "direct") c.pair_source = PairSource::direct;
    else if (pairs == "sigma") c.pair_source = PairSource::sigma;
    else throw ConfigError("unknown pair source '" + pairs + "'");
    if (j.contains("inversion")) {
      const json& ij = j.at("inversion");
      InversionConfig& inv = c.inversion;
      inv.max_order = ij.value("max_order", inv.max_order);
      inv.cutoffs = ij.value("cutoffs", std::vector<int>(static_cast<std::size_t>(inv.max_order), 3));
      inv.t0 = ij.value("t0", inv.t0);
      inv.margin = ij.value("margin", inv.margin);
      inv.guard = ij.value("guard", inv.guard);
      inv.rows = ij.value("rows", inv.rows);
      inv.multiplier_budget = ij.value("multiplier_budget", inv.multiplier_budget);
      inv.trust_condition = ij.value("trust_condition", inv.trust_condition);
      if (ij.contains("scheme")) {
        const std::string s = ij.at("scheme").get<std::string>();
        if (s == "ray") inv.scheme = RowScheme::ray;
        else if (s == "tensor") inv.scheme = RowScheme::tensor;
        else throw ConfigError("unknown row scheme '" + s + "'");
      }
    } else if (c.inversion.cutoffs.empty()) {
      c.inversion.cutoffs = {3};
    }
    return 0;
  });
  if (!c.scenery && c.trace.empty()) throw ConfigError("pipeline: needs 'scenery' or 'trace_file'");
  return c;
}

json to_json(const PipelineResult& r) {
  json j;
  j["estimate"] = to_json(r.estimate);
  j["candidates"] = json::array();
  for (const Scenery& s : r.candidates) j["candidates"].push_back(to_json(s));
  j["aligned_distance"] = r.aligned_distance ? json(*r.aligned_distance) : json(nullptr);
  j["candidate_distances"] = r.candidate_distances;
  j["diagnostics"] = r.diagnostics;
  return j;
}

std::string config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace scenery
