// SPDX-License-Identifier: Apache-2.0
//
// Run configuration. Example:
//
//   {
//     "model": {"n": 2, "lengths": [6.283185307179586]},
//     "grid": [64],
//     "stages": ["spectrum", "weyl"],
//     "output": "out",
//     "tolerances": {"tol_resid": 1e-7},
//     "trace": {"Lambda": 16, "t_max": 20}
//   }
//
// Every key is optional except "model"; unknown keys are rejected.

#pragma once

#include <cstdint>
#include <string>
#include <vector>
#include "json.hpp"
#include "kgspec/forms.hpp"
#include "kgspec/orbits.hpp"
#include "kgspec/pencil.hpp"
#include "kgspec/trace.hpp"

namespace kgspec
{

enum class Stage
{
  Spectrum,
  Weyl,
  Orbits,
  Trace,
  Forms,
  Verify
};

std::string stage_name(Stage s);
Stage parse_stage(const std::string &name);  // ConfigError on unknown names

// Adds the stages that the requested ones depend on; result in execution order.
std::vector<Stage> stage_closure(const std::vector<Stage> &requested);

struct RunConfig
{
  nlohmann::json model;
  std::vector<int> grid;  // per axis; defaults to 64
  std::vector<Stage> stages = {Stage::Spectrum};
  std::string output = "kgspec-out";
  bool cache = true;
  std::uint64_t seed = 0;
  int threads = 1;

  std::string route = "auto";  // auto | companion | symmetric | fourier | ppwave
  SolverOptions solver;
  FormsOptions forms;
  std::vector<int> forms_grid;  // eigenvector solve for the forms stage; defaults to grid

  OrbitSearch orbits;
  FlowOptions flow;

  double weyl_lo = 0.25, weyl_hi = 0.5;  // fractions of the trusted cutoff

  double Lambda = 16.0;
  double trace_t_max = 20.0;
  int samples_per_width = 8;
  TraceOptions trace;
  PeakOptions peaks;

  std::string verify_suite = "full";  // full | quick

  // Canonical JSON of everything that affects stage results (no output
  // path, cache policy or thread count).
  nlohmann::json canonical() const;
};

RunConfig parse_config_json(const nlohmann::json &j);
RunConfig parse_config(const std::string &path);

}  // namespace kgspec
