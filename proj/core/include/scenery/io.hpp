#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenery/inversion.hpp"
#include "scenery/reconstruct.hpp"
#include "scenery/step_law.hpp"
#include "scenery/torus.hpp"

namespace scenery {

// Malformed or inconsistent configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A file named by the configuration does not exist.
struct MissingArtifact : std::runtime_error {
  explicit MissingArtifact(const std::filesystem::path& p)
      : std::runtime_error("missing artifact: " + p.string()), path(p) {}
  std::filesystem::path path;
};

// Scenery: {"dim": d, "boxes": [[[lo, hi], ...per coordinate], ...]};
// one-dimensional shorthand {"arcs": [[lo, hi], ...]}.
nlohmann::json to_json(const Scenery& s);
Scenery scenery_from_json(const nlohmann::json& j);

// Step law: {"dim": d, "brownian": {"drift": [...], "sigma2": [...]},
//            "jumps": {"rate": r, "mixture": [{"weight", "mean", "var"}]}};
// scalars are accepted for one-dimensional vectors.
nlohmann::json to_json(const StepLaw& law);
StepLaw law_from_json(const nlohmann::json& j);

// {"order", "cutoff", "dim", "entries": [{"k": [...], "re", "im"}]}
nlohmann::json to_json(const SpatialFourierTable& t);
SpatialFourierTable fourier_table_from_json(const nlohmann::json& j);

// Trace CSV with header "time,value"; dt is taken from the first two rows.
struct Trace {
  double dt = 0.0;
  std::vector<double> values;
};
Trace read_trace_csv(const std::filesystem::path& p);

nlohmann::json read_json_file(const std::filesystem::path& p);

// Relative "trace_file" entries are resolved against base.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
nlohmann::json to_json(const PipelineResult& r);

// FNV-1a 64 of the compact dump (keys sorted), as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

}  // namespace scenery
