// SPDX-License-Identifier: Apache-2.0
//
// The acceptance suite: fourteen numbered criteria evaluated on the benchmark
// models with independent oracles.

#pragma once

#include <functional>
#include <string>
#include <vector>
#include "json.hpp"

namespace kgspec
{

struct CriterionResult
{
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;    // deterministic: measured values and thresholds
  double seconds = 0.0;  // wall time, kept out of the JSON report
};

struct AcceptanceOptions
{
  bool quick = false;  // smaller grids and horizons; thresholds unchanged
  std::function<void(const std::string &)> progress;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions &opts = {});

// One "[PASS] 01 name: detail (1.2 s)" line per criterion.
std::string acceptance_table(const std::vector<CriterionResult> &results, bool with_timings);

nlohmann::json acceptance_json(const std::vector<CriterionResult> &results);

}  // namespace kgspec
