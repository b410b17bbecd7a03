#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "scenery/io.hpp"

using namespace scenery;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir() {
  auto p = std::filesystem::temp_directory_path() / "scenery_unit_io";
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("scenery json round trip") {
  const Scenery s = Scenery::intervals({{0.3, 1.5}, {2.2, 3.3}, {4.1, 5.6}});
  const Scenery back = scenery_from_json(to_json(s));
  CHECK(symmetric_difference(s, back) == doctest::Approx(0.0));

  const Scenery sq = Scenery::from_intervals(2, {{{0.0, 1.0}, {0.5, 2.0}}});
  CHECK(scenery_from_json(to_json(sq)).measure() == doctest::Approx(1.5));

  const Scenery arcs = scenery_from_json(json::parse(R"({"arcs": [[0, 3.141592653589793]]})"));
  CHECK(arcs.measure() == doctest::Approx(pi));

  CHECK_THROWS_AS(scenery_from_json(json::parse(R"({"dim": 1})")), ConfigError);
  CHECK_THROWS_AS(scenery_from_json(json::parse(R"({"arcs": [[0, "x"]]})")), ConfigError);
}

TEST_CASE("step law json round trip") {
  const StepLaw law(1, Brownian{{0.7}, {0.3}}, JumpPart{2.0, {{0.4, {0.5}, {0.2}}, {0.6, {-1.0}, {0.1}}}});
  const StepLaw back = law_from_json(to_json(law));
  for (int k = -3; k <= 3; ++k) {
    std::vector<int> kk = {k};
    CHECK(back.gamma_hat(0.8, kk) == law.gamma_hat(0.8, kk));
  }

  const StepLaw scalar = law_from_json(json::parse(R"({"brownian": {"drift": 1.0, "sigma2": 2.0}})"));
  CHECK(scalar.dim() == 1);
  CHECK(scalar.brownian_part()->sigma2[0] == 2.0);

  CHECK_THROWS_AS(law_from_json(json::parse(R"({"dim": 2, "brownian": {"sigma2": [1, 2, 3]}})")), ConfigError);
  CHECK_THROWS_AS(law_from_json(json::parse(R"({"jumps": {"rate": -1, "mixture": [{"var": 1}]}})")), ConfigError);
}

TEST_CASE("fourier table json round trip") {
  const SpatialFourierTable t = SpatialFourierTable::from_scenery(Scenery::intervals({{0.0, 2.0}}), 2, 2);
  const SpatialFourierTable back = fourier_table_from_json(to_json(t));
  CHECK(back.indices == t.indices);
  CHECK(back.values == t.values);
  CHECK_THROWS_AS(fourier_table_from_json(json::parse(R"({"order": 1, "cutoff": 1, "entries": [{"k": [5], "re": 1}]})")),
                  ConfigError);
}

TEST_CASE("trace csv") {
  const auto dir = scratch_dir();
  const auto p = dir / "trace.csv";
  {
    std::ofstream out(p);
    out << "time,value\n0,1\n0.5,0\n1.0,1\n";
  }
  Trace tr = read_trace_csv(p);
  CHECK(tr.dt == doctest::Approx(0.5));
  CHECK(tr.values == std::vector<double>{1.0, 0.0, 1.0});

  {
    std::ofstream out(dir / "bad.csv");
    out << "time,value\n0;1\n";
  }
  CHECK_THROWS_AS(read_trace_csv(dir / "bad.csv"), ConfigError);
  CHECK_THROWS_AS(read_trace_csv(dir / "absent.csv"), MissingArtifact);
}

TEST_CASE("pipeline config") {
  const json j = json::parse(R"({
    "law": {"brownian": {"drift": 1.0, "sigma2": 1.0}},
    "scenery": {"arcs": [[0.0, 3.14159]]},
    "m": 12, "mode": "inverted", "seed": 5,
    "inversion": {"max_order": 2, "cutoffs": [3, 2], "scheme": "tensor"}
  })");
  PipelineConfig c = pipeline_config_from_json(j);
  CHECK(c.m == 12);
  CHECK(c.mode == ReconstructionMode::inverted);
  CHECK(c.seed == 5);
  CHECK(c.inversion.cutoffs == std::vector<int>{3, 2});
  CHECK(c.inversion.scheme == RowScheme::tensor);
  CHECK(c.pair_source == PairSource::direct);

  json bad = j;
  bad["mode"] = "guess";
  CHECK_THROWS_AS(pipeline_config_from_json(bad), ConfigError);
  bad = j;
  bad["pair_source"] = "other";
  CHECK_THROWS_AS(pipeline_config_from_json(bad), ConfigError);
  bad = j;
  bad.erase("scenery");
  CHECK_THROWS_AS(pipeline_config_from_json(bad), ConfigError);
  bad["trace_file"] = "absent.csv";
  CHECK_THROWS_AS(pipeline_config_from_json(bad, scratch_dir()), MissingArtifact);
}

TEST_CASE("config hash") {
  const json a = json::parse(R"({"b": 1, "a": [1, 2]})");
  const json b = json::parse(R"({"a": [1, 2], "b": 1})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) != config_hash(json::parse(R"({"a": [2, 1], "b": 1})")));
  // FNV-1a of the empty object "{}"
  CHECK(config_hash(json::object()) == "08f44b07b5901a25");
}

TEST_CASE("json files") {
  const auto dir = scratch_dir();
  {
    std::ofstream out(dir / "broken.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(read_json_file(dir / "broken.json"), ConfigError);
  CHECK_THROWS_AS(read_json_file(dir / "absent.json"), MissingArtifact);
}
