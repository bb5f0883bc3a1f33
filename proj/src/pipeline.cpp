// SPDX-License-Identifier: Apache-2.0

#include "kgspec/pipeline.hpp"

#include <chrono>
#include <sstream>
#include "kgspec/acceptance.hpp"
#include "kgspec/discretization.hpp"
#include "kgspec/errors.hpp"
#include "kgspec/forms.hpp"
#include "kgspec/io.hpp"
#include "kgspec/model.hpp"
#include "kgspec/ppwave.hpp"
#include "kgspec/ppwave_orbits.hpp"
#include "kgspec/trace.hpp"

namespace kgspec
{

using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

const char *kManifestFile = "manifest.json";

std::vector<std::string> stage_files(Stage s)
{
  switch (s)
  {
    case Stage::Spectrum:
      return {"spectrum.csv", "spectrum.json"};
    case Stage::Weyl:
      return {"weyl.json", "counting.csv"};
    case Stage::Orbits:
      return {"orbits.csv", "orbits.json"};
    case Stage::Trace:
      return {"trace.csv", "peaks.json", "trace.json"};
    case Stage::Forms:
      return {"forms.json"};
    case Stage::Verify:
      return {"verify.json", "verify.txt"};
  }
  return {};
}

std::string hash_json(const json &j)
{
  return hex64(content_hash(j.dump()));
}

json spectrum_inputs(const RunConfig &c)
{
  const json can = c.canonical();
  return {{"version", kVersion}, {"model", can["model"]}, {"grid", can["grid"]}, {"route", can["route"]},
          {"solver", can["solver"]}};
}

json orbit_inputs(const RunConfig &c)
{
  const json can = c.canonical();
  return {{"version", kVersion}, {"model", can["model"]}, {"orbits", can["orbits"]}, {"seed", can["seed"]}};
}

SpectralGrid model_grid(const StationaryModel &m, const std::vector<int> &points)
{
  return SpectralGrid(points, m.lengths);
}

// Spectrum ----------------------------------------------------------------

Artifacts spectrum_stage(const RunConfig &cfg)
{
  const StationaryModel model = build_model(cfg.model);
  const SpectralGrid grid = model_grid(model, cfg.grid);
  SpectrumResult spec;
  const bool pp = model.ppwave.has_value();
  if (cfg.route == "ppwave" && !pp)
    throw ConfigError("/solver/route", "the ppwave route needs the ppwave family");
  if (pp && (cfg.route == "auto" || cfg.route == "ppwave"))
  {
    const std::vector<int> base_pts(cfg.grid.begin() + 1, cfg.grid.end());
    const SpectralGrid base(base_pts, model.ppwave->base_lengths);
    spec = ppwave_spectrum(model, base, cfg.solver);
    spec.route = "ppwave";
  }
  else if (cfg.route == "fourier" || (cfg.route == "auto" && model.constant_coefficients() && grid.size() > 256))
  {
    spec = solve_spectrum_fourier(model, grid, cfg.solver);
  }
  else
  {
    SolverOptions opts = cfg.solver;
    opts.keep_vectors = false;
    spec = solve_spectrum(assemble(model, grid), opts);
  }
  json j;
  j["route"] = spec.route;
  j["lambda_cutoff"] = spec.lambda_cutoff;
  j["candidates"] = spec.candidates;
  j["trusted"] = spec.trusted_values().size();
  j["groups"] = spec.groups.size();
  j["complex_modes"] = spec.complex_modes.size();
  j["jordan_at_zero"] = {{"algebraic", spec.jordan_at_zero.algebraic},
                         {"geometric", spec.jordan_at_zero.geometric},
                         {"ill_conditioned", spec.jordan_at_zero.ill_conditioned}};
  j["symmetry"] = {{"reflection_defect", spec.symmetry.reflection_defect},
                   {"conjugation_defect", spec.symmetry.conjugation_defect},
                   {"multiplicity_mismatches", spec.symmetry.multiplicity_mismatches},
                   {"quadruples_ok", spec.symmetry.quadruples_ok}};
  j["cross_check_discrepancy"] = spec.cross_check_discrepancy < 0 ? json(nullptr) : json(spec.cross_check_discrepancy);
  j["cross_check_compared"] = spec.cross_check_compared;
  return {{"spectrum.csv", spectrum_csv(spec, cfg.solver.cluster_tol)}, {"spectrum.json", dump_json(j)}};
}

TraceInput load_spectrum(const Artifacts &a, const RunConfig &cfg)
{
  const json j = json::parse(a.at("spectrum.json"));
  return trace_input_from_csv(a.at("spectrum.csv"), j.at("lambda_cutoff").get<double>(), cfg.solver.tol_real);
}

// Weyl --------------------------------------------------------------------

Artifacts weyl_stage(const RunConfig &cfg, const Artifacts &spectrum)
{
  const StationaryModel model = build_model(cfg.model);
  const TraceInput in = load_spectrum(spectrum, cfg);
  // The volume quadrature converges spectrally; 64 points per axis is ample
  // for the trigonometric fields accepted by the model parser.
  const SpectralGrid vgrid(std::vector<int>(static_cast<std::size_t>(model.d()), 64), model.lengths);
  const double volume = phase_space_volume(model, vgrid);
  const WeylFit fit = weyl_fit(in, model.n, volume, cfg.weyl_lo * in.cutoff, cfg.weyl_hi * in.cutoff);
  const CountingFunction cf = counting_function(in);
  json j;
  j["c_fit"] = fit.c_fit;
  j["c_theory"] = fit.c_theory;
  j["rel_err"] = fit.rel_err;
  j["remainder_exponent"] = fit.remainder_exponent;
  j["window"] = {fit.lo, fit.hi};
  j["smoothing"] = fit.smoothing;
  j["levels_in_window"] = fit.levels_in_window;
  j["volume"] = volume;
  j["residue"] = symplectic_residue(model, vgrid);
  j["complex_excluded"] = cf.complex_excluded;
  std::string csv = "lambda,count\n";
  for (std::size_t i = 0; i < cf.thresholds.size(); i++)
    csv += format_double(cf.thresholds[i]) + "," + format_double(cf.counts[i]) + "\n";
  return {{"weyl.json", dump_json(j)}, {"counting.csv", csv}};
}

// Orbits ------------------------------------------------------------------

Artifacts orbits_stage(const RunConfig &cfg)
{
  const StationaryModel model = build_model(cfg.model);
  OrbitSearch search = cfg.orbits;
  json j;
  if (model.ppwave)
  {
    const auto seeds = ppwave_equilibrium_seeds(model, search.t_max);
    search.seeds.insert(search.seeds.end(), seeds.begin(), seeds.end());
    if (model.ppwave->base_lengths.size() == 1)
    {
      json cl = json::array();
      for (const PPWaveClassicalOrbit &o : ppwave_period_set(model, search.t_max))
      {
        cl.push_back({{"T", o.cond.T},
                      {"k", o.cond.k},
                      {"turns", o.cond.r},
                      {"kind", o.mech.kind},
                      {"E", o.mech.E},
                      {"ell", o.mech.ell},
                      {"multiplicity", o.multiplicity}});
      }
      j["ppwave_period_conditions"] = cl;
    }
  }
  const OrbitSearchResult r = find_periodic_orbits(model, search, cfg.flow);
  j["candidates"] = r.candidates;
  j["period_set"] = period_set(r.orbits, search.tol_orbit * 1e3);
  j["discarded"] = r.log;
  json orbits = json::array();
  for (const PeriodicOrbit &o : r.orbits)
  {
    orbits.push_back({{"period", o.period},
                      {"primitive_period", o.primitive_period},
                      {"winding", o.winding},
                      {"x0", o.seed.x},
                      {"xi0", o.seed.xi},
                      {"det_I_minus_P", o.det_I_minus_P},
                      {"det_alt_section", o.det_alt_section},
                      {"symplectic_defect", o.symplectic_defect},
                      {"energy_drift", o.energy_drift},
                      {"stability", o.stability},
                      {"origin", o.origin}});
  }
  j["orbits"] = orbits;
  return {{"orbits.csv", orbits_csv(r.orbits)}, {"orbits.json", dump_json(j)}};
}

// Trace -------------------------------------------------------------------

Artifacts trace_stage(const RunConfig &cfg, const Artifacts &spectrum, const Artifacts &orbits)
{
  const TraceInput in = load_spectrum(spectrum, cfg);
  const std::vector<PeriodicOrbit> orb = orbits_from_csv(orbits.at("orbits.csv"));
  if (cfg.orbits.t_max < cfg.trace_t_max)
    throw ConfigError("/orbits/t_max", "orbit horizon is shorter than the trace horizon");
  const auto periods = classical_periods(orb, cfg.orbits.tol_orbit * 1e3);
  const TraceProfile prof =
      smoothed_trace(in, trace_times(0.0, cfg.trace_t_max, cfg.Lambda, cfg.samples_per_width), cfg.Lambda, cfg.trace);
  const PeakReport rep = detect_peaks(prof, periods, cfg.peaks);
  json j;
  j["Lambda"] = cfg.Lambda;
  j["lines_used"] = prof.lines_used;
  j["truncation_factor"] = prof.truncation_factor;
  j["complex_bound"] = prof.complex_bound;
  j["floor"] = rep.floor;
  j["t_min"] = rep.t_min;
  j["unmatched_peaks"] = rep.unmatched_peaks;
  json missing = json::array();
  for (int k : rep.missing_periods)
    missing.push_back(periods[static_cast<std::size_t>(k)].T);
  j["missing_periods"] = missing;
  j["visible_periods"] = rep.visible_periods.size();
  j["peak_before_shortest"] = rep.peak_before_shortest;
  return {{"trace.csv", trace_csv(prof)}, {"peaks.json", dump_json(peaks_json(rep))}, {"trace.json", dump_json(j)}};
}

// Forms -------------------------------------------------------------------

Artifacts forms_stage(const RunConfig &cfg)
{
  const StationaryModel model = build_model(cfg.model);
  const OperatorMatrices mats = assemble(model, model_grid(model, cfg.forms_grid));
  SolverOptions opts = cfg.solver;
  opts.keep_vectors = true;
  const SpectrumResult spec = solve_spectrum(mats, opts);
  const FormsReport f = forms_report(mats, spec, cfg.forms);
  json j;
  j["grid"] = cfg.forms_grid;
  j["modes_used"] = f.modes_used;
  j["lemma_max_defect"] = f.lemma12_max_defect;
  j["sigma_antisymmetry_defect"] = f.sigma_antisymmetry_defect;
  j["time_invariance_defect"] = f.time_invariance_defect;
  j["pairing_max_offpair"] = f.pairing_max_offpair;
  j["pairing_violations"] = f.pairing_violations.size();
  j["pontryagin_index"] = f.pontryagin_index;
  j["pontryagin_indeterminate"] = f.pontryagin_indeterminate;
  return {{"forms.json", dump_json(j)}};
}

// Verify ------------------------------------------------------------------

Artifacts verify_stage(const RunConfig &cfg, const std::function<void(const std::string &)> &log, bool &all_pass)
{
  AcceptanceOptions opts;
  opts.quick = cfg.verify_suite == "quick";
  opts.progress = log;
  const auto results = run_acceptance(opts);
  all_pass = std::all_of(results.begin(), results.end(), [](const CriterionResult &r) { return r.pass; });
  return {{"verify.json", dump_json(acceptance_json(results))}, {"verify.txt", acceptance_table(results, false)}};
}

bool load_cached(const fs::path &dir, Stage s, Artifacts &out)
{
  if (!fs::exists(dir / ".complete"))
    return false;
  for (const std::string &f : stage_files(s))
  {
    if (!fs::exists(dir / f))
      return false;
    out[f] = read_file(dir / f);
  }
  return true;
}

void store(const fs::path &dir, const Artifacts &a)
{
  for (const auto &[name, bytes] : a)
    write_file_atomic(dir / name, bytes);
  write_file_atomic(dir / ".complete", "");
}

}  // namespace

std::string stage_key(const RunConfig &cfg, Stage stage)
{
  const json can = cfg.canonical();
  switch (stage)
  {
    case Stage::Spectrum:
      return hash_json(spectrum_inputs(cfg));
    case Stage::Weyl:
      return hash_json({{"spectrum", spectrum_inputs(cfg)}, {"weyl", can["weyl"]}, {"tol_real", cfg.solver.tol_real}});
    case Stage::Orbits:
      return hash_json(orbit_inputs(cfg));
    case Stage::Trace:
      return hash_json({{"spectrum", spectrum_inputs(cfg)},
                        {"orbits", orbit_inputs(cfg)},
                        {"trace", can["trace"]},
                        {"tol_real", cfg.solver.tol_real}});
    case Stage::Forms:
      return hash_json({{"version", kVersion}, {"model", can["model"]}, {"solver", can["solver"]}, {"forms", can["forms"]}});
    case Stage::Verify:
      return hash_json({{"version", kVersion}, {"verify", can["verify"]}});
  }
  return "";
}

PipelineResult run_pipeline(const RunConfig &cfg, const std::function<void(const std::string &)> &log)
{
  auto say = [&](const std::string &s) {
    if (log)
      log(s);
  };
  PipelineResult res;
  const fs::path out(cfg.output);
  fs::create_directories(out);
  std::map<Stage, Artifacts> done;
  bool failed = false;
  for (Stage s : stage_closure(cfg.stages))
  {
    StageOutcome o;
    o.stage = s;
    o.key = stage_key(cfg, s);
    if (failed)
    {
      o.error = "skipped after an upstream failure";
      res.stages.push_back(o);
      continue;
    }
    const fs::path dir = out / "cache" / (stage_name(s) + "-" + o.key);
    const auto t0 = std::chrono::steady_clock::now();
    Artifacts a;
    bool verify_pass = true;
    try
    {
      if (cfg.cache && load_cached(dir, s, a))
      {
        o.cached = true;
        if (s == Stage::Verify)
          verify_pass = json::parse(a.at("verify.json")).at("all_pass").get<bool>();
        say("stage " + stage_name(s) + ": cache hit " + o.key);
      }
      else
      {
        say("stage " + stage_name(s) + ": computing");
        switch (s)
        {
          case Stage::Spectrum:
            a = spectrum_stage(cfg);
            break;
          case Stage::Weyl:
            a = weyl_stage(cfg, done.at(Stage::Spectrum));
            break;
          case Stage::Orbits:
            a = orbits_stage(cfg);
            break;
          case Stage::Trace:
            a = trace_stage(cfg, done.at(Stage::Spectrum), done.at(Stage::Orbits));
            break;
          case Stage::Forms:
            a = forms_stage(cfg);
            break;
          case Stage::Verify:
            a = verify_stage(cfg, log, verify_pass);
            break;
        }
        store(dir, a);
      }
      for (const auto &[name, bytes] : a)
      {
        write_file_atomic(out / name, bytes);
        o.files.push_back(name);
      }
      o.ok = true;
      if (!verify_pass)
        o.exit_code = 3;
      done[s] = std::move(a);
    }
    catch (const ConfigError &e)
    {
      o.error = e.what();
      o.exit_code = 2;
    }
    catch (const std::exception &e)
    {
      o.error = e.what();
      o.exit_code = 1;
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.ok)
    {
      failed = true;
      say("stage " + stage_name(s) + " failed: " + o.error);
    }
    if (o.exit_code != 0 && res.exit_code == 0)
      res.exit_code = o.exit_code;
    res.stages.push_back(o);
  }

  json m;
  m["version"] = kVersion;
  m["config_hash"] = hash_json(cfg.canonical());
  m["config"] = cfg.canonical();
  m["seed"] = cfg.seed;
  m["threads"] = cfg.threads;
  json st = json::array();
  std::ostringstream sum;
  sum << kVersion << "\n";
  for (const StageOutcome &o : res.stages)
  {
    st.push_back({{"stage", stage_name(o.stage)},
                  {"key", o.key},
                  {"cached", o.cached},
                  {"ok", o.ok},
                  {"seconds", o.seconds},
                  {"files", o.files},
                  {"error", o.error}});
    sum << stage_name(o.stage) << ": " << (o.ok ? "ok" : "FAILED") << (o.cached ? " (cached)" : "") << "  "
        << o.seconds << " s";
    if (!o.error.empty())
      sum << "  " << o.error;
    sum << "\n";
  }
  m["stages"] = st;
  m["exit_code"] = res.exit_code;
  write_file_atomic(out / kManifestFile, dump_json(m));
  res.summary = sum.str();
  write_file_atomic(out / "summary.txt", res.summary);
  return res;
}

void export_artifact(const fs::path &out_dir, const std::string &what, const std::string &format, const fs::path &dest)
{
  static const std::map<std::pair<std::string, std::string>, std::string> files = {
      {{"spectrum", "csv"}, "spectrum.csv"}, {{"spectrum", "json"}, "spectrum.json"},
      {{"orbits", "csv"}, "orbits.csv"},     {{"orbits", "json"}, "orbits.json"},
      {{"trace", "csv"}, "trace.csv"},       {{"trace", "json"}, "trace.json"},
      {{"peaks", "json"}, "peaks.json"},     {{"weyl", "json"}, "weyl.json"},
      {{"counting", "csv"}, "counting.csv"}, {{"forms", "json"}, "forms.json"},
      {{"verify", "json"}, "verify.json"},   {{"manifest", "json"}, kManifestFile}};
  const auto it = files.find({what, format});
  if (it == files.end())
    throw ConfigError("no artifact '" + what + "' in format '" + format + "'");
  const fs::path src = out_dir / it->second;
  if (!fs::exists(src))
    throw NumericalError("artifact " + src.string() + " has not been produced yet");
  write_file_atomic(dest, read_file(src));
}

}  // namespace kgspec
