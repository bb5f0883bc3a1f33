// SPDX-License-Identifier: Apache-2.0

#include "kgspec/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include "kgspec/errors.hpp"
#include "kgspec/model.hpp"

namespace kgspec
{

using nlohmann::json;

namespace
{

void check_keys(const json &j, const std::string &ptr, const std::set<std::string> &allowed)
{
  if (!j.is_object())
    throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
  for (const auto &it : j.items())
  {
    if (!allowed.count(it.key()))
      throw ConfigError(ptr + "/" + it.key(), "unknown key");
  }
}

double get_number(const json &j, const std::string &ptr, double lo = -1e300, double hi = 1e300)
{
  if (!j.is_number())
    throw ConfigError(ptr, "expected a number");
  const double v = j.get<double>();
  if (!(v >= lo && v <= hi))
    throw ConfigError(ptr, "value out of range");
  return v;
}

int get_int(const json &j, const std::string &ptr, int lo, int hi)
{
  if (!j.is_number_integer())
    throw ConfigError(ptr, "expected an integer");
  const auto v = j.get<long long>();
  if (v < lo || v > hi)
    throw ConfigError(ptr, "value out of range");
  return static_cast<int>(v);
}

bool get_bool(const json &j, const std::string &ptr)
{
  if (!j.is_boolean())
    throw ConfigError(ptr, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json &j, const std::string &ptr)
{
  if (!j.is_string())
    throw ConfigError(ptr, "expected a string");
  return j.get<std::string>();
}

std::vector<int> get_grid(const json &j, const std::string &ptr, int axes)
{
  std::vector<int> g;
  if (j.is_number_integer())
  {
    g.assign(static_cast<std::size_t>(axes), get_int(j, ptr, 4, 4096));
  }
  else if (j.is_array())
  {
    for (std::size_t i = 0; i < j.size(); i++)
      g.push_back(get_int(j[i], ptr + "/" + std::to_string(i), 4, 4096));
    if (static_cast<int>(g.size()) != axes)
      throw ConfigError(ptr, "expected " + std::to_string(axes) + " grid sizes");
  }
  else
  {
    throw ConfigError(ptr, "expected an integer or an array of integers");
  }
  return g;
}

std::vector<double> get_numbers(const json &j, const std::string &ptr)
{
  if (!j.is_array())
    throw ConfigError(ptr, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); i++)
    v.push_back(get_number(j[i], ptr + "/" + std::to_string(i)));
  return v;
}

}  // namespace

std::string stage_name(Stage s)
{
  switch (s)
  {
    case Stage::Spectrum:
      return "spectrum";
    case Stage::Weyl:
      return "weyl";
    case Stage::Orbits:
      return "orbits";
    case Stage::Trace:
      return "trace";
    case Stage::Forms:
      return "forms";
    case Stage::Verify:
      return "verify";
  }
  return "?";
}

Stage parse_stage(const std::string &name)
{
  for (Stage s : {Stage::Spectrum, Stage::Weyl, Stage::Orbits, Stage::Trace, Stage::Forms, Stage::Verify})
  {
    if (stage_name(s) == name)
      return s;
  }
  throw ConfigError("/stages", "unknown stage '" + name + "'");
}

std::vector<Stage> stage_closure(const std::vector<Stage> &requested)
{
  std::set<Stage> want(requested.begin(), requested.end());
  if (want.count(Stage::Trace))
  {
    want.insert(Stage::Spectrum);
    want.insert(Stage::Orbits);
  }
  if (want.count(Stage::Weyl))
    want.insert(Stage::Spectrum);
  // std::set orders by the enum, which is the execution order.
  return {want.begin(), want.end()};
}

json RunConfig::canonical() const
{
  json j;
  j["model"] = model;
  j["grid"] = grid;
  j["route"] = route;
  j["seed"] = seed;
  j["solver"] = {{"tol_resid", solver.tol_resid},     {"cluster_tol", solver.cluster_tol},
                 {"tol_zero", solver.tol_zero},       {"tol_real", solver.tol_real},
                 {"tol_tail", solver.tol_tail},       {"cutoff_fraction", solver.cutoff_fraction},
                 {"route", route_name(solver.route)}, {"cross_check", solver.cross_check},
                 {"cross_check_max_size", solver.cross_check_max_size}};
  j["forms"] = {{"tol_pairing", forms.tol_pairing}, {"grid", forms_grid}, {"evolve_times", forms.evolve_times}};
  j["orbits"] = {{"t_max", orbits.t_max},
                 {"scan_positions", orbits.scan_positions},
                 {"scan_directions", orbits.scan_directions},
                 {"near_return", orbits.near_return},
                 {"tol_orbit", orbits.tol_orbit},
                 {"newton_iterations", orbits.newton_iterations},
                 {"windings", orbits.windings}};
  j["weyl"] = {weyl_lo, weyl_hi};
  j["trace"] = {{"Lambda", Lambda},
                {"t_max", trace_t_max},
                {"samples_per_width", samples_per_width},
                {"min_cutoff_ratio", trace.min_cutoff_ratio},
                {"floor_mads", peaks.floor_mads},
                {"t_min_widths", peaks.t_min_widths},
                {"match_widths", peaks.match_widths},
                {"half_width", peaks.amplitude.half_width},
                {"cluster_radius", peaks.amplitude.cluster_radius}};
  j["verify"] = verify_suite;
  return j;
}

RunConfig parse_config_json(const json &j)
{
  check_keys(j, "",
             {"model", "grid", "stages", "output", "cache", "seed", "threads", "tolerances", "solver", "forms",
              "orbits", "weyl", "trace", "verify"});
  RunConfig c;
  if (!j.contains("model"))
    throw ConfigError("/model", "missing required field");
  c.model = j.at("model");
  int n = 0;
  try
  {
    n = build_model(c.model).n;
  }
  catch (const ConfigError &e)
  {
    const std::string what = e.what();
    throw ConfigError(what.rfind('/', 0) == 0 ? "/model" + what : "/model: " + what);
  }
  c.grid = j.contains("grid") ? get_grid(j.at("grid"), "/grid", n - 1) : std::vector<int>(n - 1, 64);

  if (j.contains("stages"))
  {
    const json &s = j.at("stages");
    if (!s.is_array())
      throw ConfigError("/stages", "expected an array of stage names");
    std::vector<Stage> req;
    for (std::size_t i = 0; i < s.size(); i++)
    {
      try
      {
        req.push_back(parse_stage(get_string(s[i], "/stages/" + std::to_string(i))));
      }
      catch (const ConfigError &)
      {
        throw ConfigError("/stages/" + std::to_string(i), "unknown stage");
      }
    }
    c.stages = stage_closure(req);
  }
  if (j.contains("output"))
    c.output = get_string(j.at("output"), "/output");
  if (j.contains("cache"))
    c.cache = get_bool(j.at("cache"), "/cache");
  if (j.contains("seed"))
  {
    if (!j.at("seed").is_number_unsigned())
      throw ConfigError("/seed", "expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("threads"))
    c.threads = get_int(j.at("threads"), "/threads", 1, 1024);

  if (j.contains("tolerances"))
  {
    const json &t = j.at("tolerances");
    check_keys(t, "/tolerances",
               {"tol_resid", "cluster_tol", "tol_zero", "tol_real", "tol_tail", "cutoff_fraction", "tol_orbit",
                "tol_pairing"});
    auto num = [&](const char *k, double &dst, double lo, double hi) {
      if (t.contains(k))
        dst = get_number(t.at(k), std::string("/tolerances/") + k, lo, hi);
    };
    num("tol_resid", c.solver.tol_resid, 0.0, 1.0);
    num("cluster_tol", c.solver.cluster_tol, 0.0, 1.0);
    num("tol_zero", c.solver.tol_zero, 0.0, 1.0);
    num("tol_real", c.solver.tol_real, 0.0, 1.0);
    num("tol_tail", c.solver.tol_tail, 0.0, 1.0);
    num("cutoff_fraction", c.solver.cutoff_fraction, 1e-3, 1.0);
    num("tol_orbit", c.orbits.tol_orbit, 0.0, 1.0);
    num("tol_pairing", c.forms.tol_pairing, 0.0, 1.0);
    c.forms.cluster_tol = c.solver.cluster_tol;
    c.forms.tol_zero = c.solver.tol_zero;
    c.forms.tol_real = c.solver.tol_real;
  }
  if (j.contains("solver"))
  {
    const json &s = j.at("solver");
    check_keys(s, "/solver", {"route", "cross_check", "cross_check_max_size"});
    if (s.contains("route"))
    {
      c.route = get_string(s.at("route"), "/solver/route");
      if (c.route == "companion")
        c.solver.route = Route::Companion;
      else if (c.route == "symmetric")
        c.solver.route = Route::Symmetric;
      else if (c.route != "auto" && c.route != "fourier" && c.route != "ppwave")
        throw ConfigError("/solver/route", "expected auto, companion, symmetric, fourier or ppwave");
    }
    if (s.contains("cross_check"))
      c.solver.cross_check = get_bool(s.at("cross_check"), "/solver/cross_check");
    if (s.contains("cross_check_max_size"))
      c.solver.cross_check_max_size = get_int(s.at("cross_check_max_size"), "/solver/cross_check_max_size", 0, 1 << 20);
  }
  c.forms_grid = c.grid;
  if (j.contains("forms"))
  {
    const json &f = j.at("forms");
    check_keys(f, "/forms", {"grid", "evolve_times"});
    if (f.contains("grid"))
      c.forms_grid = get_grid(f.at("grid"), "/forms/grid", n - 1);
    if (f.contains("evolve_times"))
      c.forms.evolve_times = get_numbers(f.at("evolve_times"), "/forms/evolve_times");
  }
  c.orbits.rng_seed = c.seed;
  if (j.contains("orbits"))
  {
    const json &o = j.at("orbits");
    check_keys(o, "/orbits", {"t_max", "scan_positions", "scan_directions", "near_return", "newton_iterations", "windings"});
    if (o.contains("t_max"))
      c.orbits.t_max = get_number(o.at("t_max"), "/orbits/t_max", 1e-6, 1e4);
    if (o.contains("scan_positions"))
      c.orbits.scan_positions = get_int(o.at("scan_positions"), "/orbits/scan_positions", 0, 64);
    if (o.contains("scan_directions"))
      c.orbits.scan_directions = get_int(o.at("scan_directions"), "/orbits/scan_directions", 1, 1024);
    if (o.contains("near_return"))
      c.orbits.near_return = get_number(o.at("near_return"), "/orbits/near_return", 0.0, 10.0);
    if (o.contains("newton_iterations"))
      c.orbits.newton_iterations = get_int(o.at("newton_iterations"), "/orbits/newton_iterations", 1, 1000);
    if (o.contains("windings"))
    {
      const json &w = o.at("windings");
      if (!w.is_array())
        throw ConfigError("/orbits/windings", "expected an array of integer vectors");
      for (std::size_t i = 0; i < w.size(); i++)
      {
        const std::string ptr = "/orbits/windings/" + std::to_string(i);
        if (!w[i].is_array() || static_cast<int>(w[i].size()) != n - 1)
          throw ConfigError(ptr, "expected " + std::to_string(n - 1) + " integers");
        std::vector<int> v;
        for (std::size_t k = 0; k < w[i].size(); k++)
          v.push_back(get_int(w[i][k], ptr + "/" + std::to_string(k), -1000, 1000));
        c.orbits.windings.push_back(v);
      }
    }
  }
  if (j.contains("weyl"))
  {
    const json &w = j.at("weyl");
    check_keys(w, "/weyl", {"window"});
    if (w.contains("window"))
    {
      const auto v = get_numbers(w.at("window"), "/weyl/window");
      if (v.size() != 2 || !(v[0] > 0.0 && v[1] > v[0] && v[1] <= 1.0))
        throw ConfigError("/weyl/window", "expected [lo, hi] fractions of the cutoff with 0 < lo < hi <= 1");
      c.weyl_lo = v[0];
      c.weyl_hi = v[1];
    }
  }
  if (j.contains("trace"))
  {
    const json &t = j.at("trace");
    check_keys(t, "/trace",
               {"Lambda", "t_max", "samples_per_width", "min_cutoff_ratio", "floor_mads", "t_min_widths",
                "match_widths", "half_width", "cluster_radius"});
    auto num = [&](const char *k, double &dst, double lo, double hi) {
      if (t.contains(k))
        dst = get_number(t.at(k), std::string("/trace/") + k, lo, hi);
    };
    num("Lambda", c.Lambda, 1e-3, 1e4);
    num("t_max", c.trace_t_max, 1e-3, 1e4);
    num("min_cutoff_ratio", c.trace.min_cutoff_ratio, 0.0, 100.0);
    num("floor_mads", c.peaks.floor_mads, 0.0, 100.0);
    num("t_min_widths", c.peaks.t_min_widths, 0.0, 100.0);
    num("match_widths", c.peaks.match_widths, 0.0, 100.0);
    num("half_width", c.peaks.amplitude.half_width, 0.1, 100.0);
    num("cluster_radius", c.peaks.amplitude.cluster_radius, 0.0, 100.0);
    if (t.contains("samples_per_width"))
      c.samples_per_width = get_int(t.at("samples_per_width"), "/trace/samples_per_width", 2, 1000);
  }
  if (j.contains("verify"))
  {
    const json &v = j.at("verify");
    check_keys(v, "/verify", {"suite"});
    if (v.contains("suite"))
    {
      c.verify_suite = get_string(v.at("suite"), "/verify/suite");
      if (c.verify_suite != "full" && c.verify_suite != "quick")
        throw ConfigError("/verify/suite", "expected full or quick");
    }
  }
  return c;
}

RunConfig parse_config(const std::string &path)
{
  std::ifstream is(path);
  if (!is)
    throw ConfigError("cannot open config file " + path);
  json j;
  try
  {
    j = json::parse(is);
  }
  catch (const json::parse_error &e)
  {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config_json(j);
}

}  // namespace kgspec
