#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scenery::selftest {

struct Options {
  std::uint64_t seed = 20240601;
  int workers = 1;
  // Replaces the Brownian coefficient of the closed-form transform by
  // 2 pi^2 sigma2 in the oracle-agreement check (negative control).
  bool corrupt_gamma = false;
  std::vector<int> only;  // empty: all criteria
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0;
  nlohmann::json data;  // timing-free outputs, compared by the determinism check
};

std::vector<CriterionResult> run(const Options& opt);

// "PASS  3 three-way-temporal  ...  (1.23 s)" per criterion.
std::string format_line(const CriterionResult& r);

}  // namespace scenery::selftest
