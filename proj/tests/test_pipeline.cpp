// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <unistd.h>
#include <filesystem>
#include <numbers>
#include "kgspec/io.hpp"
#include "kgspec/pipeline.hpp"

using namespace kgspec;
using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Pipeline : public ::testing::Test
{
protected:
  void SetUp() override
  {
    root_ = fs::temp_directory_path() /
            ("kgspec-test-" + std::to_string(::getpid()) + "-" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  RunConfig config(const std::vector<std::string> &stages, const std::string &dir = "out") const
  {
    json j = {{"model", {{"n", 2}, {"lengths", {kTwoPi}}, {"lapse", "1+0.1*cos(x)"}}},
              {"grid", {48}},
              {"stages", stages},
              {"orbits", {{"t_max", 9}}},
              {"trace", {{"Lambda", 2.2}, {"t_max", 9}}}};
    RunConfig c = parse_config_json(j);
    c.output = (root_ / dir).string();
    return c;
  }

  fs::path root_;
};

bool stage_cached(const PipelineResult &r, Stage s)
{
  for (const StageOutcome &o : r.stages)
    if (o.stage == s)
      return o.cached;
  ADD_FAILURE() << "stage not run";
  return false;
}

}  // namespace

TEST_F(Pipeline, SpectrumIsReusedByALaterTraceRun)
{
  const PipelineResult first = run_pipeline(config({"spectrum"}));
  ASSERT_EQ(first.exit_code, 0) << first.summary;
  EXPECT_FALSE(stage_cached(first, Stage::Spectrum));
  const PipelineResult second = run_pipeline(config({"trace"}));
  ASSERT_EQ(second.exit_code, 0) << second.summary;
  EXPECT_TRUE(stage_cached(second, Stage::Spectrum));
  EXPECT_FALSE(stage_cached(second, Stage::Trace));
  EXPECT_EQ(second.stages.size(), 3u);
  const json manifest = json::parse(read_file(root_ / "out" / "manifest.json"));
  EXPECT_EQ(manifest["version"], kVersion);
  EXPECT_EQ(manifest["stages"].size(), 3u);
  EXPECT_TRUE(manifest["stages"][0]["cached"].get<bool>());
  EXPECT_TRUE(fs::exists(root_ / "out" / "summary.txt"));
}

TEST_F(Pipeline, ChangedToleranceMissesTheCache)
{
  RunConfig a = config({"spectrum"});
  run_pipeline(a);
  RunConfig b = a;
  b.solver.tol_resid = 1e-6;
  EXPECT_NE(stage_key(a, Stage::Spectrum), stage_key(b, Stage::Spectrum));
  EXPECT_FALSE(stage_cached(run_pipeline(b), Stage::Spectrum));
  EXPECT_TRUE(stage_cached(run_pipeline(a), Stage::Spectrum));
  // Trace parameters do not touch the spectrum key.
  RunConfig c = a;
  c.Lambda = 2.5;
  EXPECT_EQ(stage_key(a, Stage::Spectrum), stage_key(c, Stage::Spectrum));
  EXPECT_NE(stage_key(a, Stage::Trace), stage_key(c, Stage::Trace));
}

TEST_F(Pipeline, CachedAndFreshArtifactsAreByteIdentical)
{
  const std::vector<std::string> all = {"spectrum", "weyl", "orbits", "trace", "forms"};
  RunConfig fresh = config(all, "fresh");
  fresh.cache = false;
  ASSERT_EQ(run_pipeline(fresh).exit_code, 0);
  RunConfig cached = config(all, "cached");
  run_pipeline(cached);
  const PipelineResult again = run_pipeline(cached);
  ASSERT_EQ(again.exit_code, 0);
  int compared = 0;
  for (const StageOutcome &o : again.stages)
  {
    EXPECT_TRUE(o.cached);
    for (const std::string &f : o.files)
    {
      EXPECT_EQ(read_file(root_ / "fresh" / f), read_file(root_ / "cached" / f)) << f;
      compared++;
    }
  }
  EXPECT_EQ(compared, 10);
}

TEST_F(Pipeline, FailedStageAbortsDownstreamAndKeepsEarlierResults)
{
  RunConfig c = config({"trace", "forms"});
  c.Lambda = 40.0;  // cutoff of a 48-point circle is far below 3 Lambda
  const PipelineResult r = run_pipeline(c);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_TRUE(fs::exists(root_ / "out" / "spectrum.csv"));
  bool trace_failed = false, forms_skipped = false;
  for (const StageOutcome &o : r.stages)
  {
    trace_failed |= o.stage == Stage::Trace && !o.ok;
    forms_skipped |= o.stage == Stage::Forms && !o.ok && o.error.find("skipped") != std::string::npos;
  }
  EXPECT_TRUE(trace_failed);
  EXPECT_TRUE(forms_skipped);
}

TEST_F(Pipeline, ExportWritesTheDocumentedSchemas)
{
  ASSERT_EQ(run_pipeline(config({"trace"})).exit_code, 0);
  const fs::path out = root_ / "out";
  export_artifact(out, "spectrum", "csv", root_ / "s.csv");
  export_artifact(out, "trace", "csv", root_ / "t.csv");
  export_artifact(out, "peaks", "json", root_ / "p.json");
  const std::string s = read_file(root_ / "s.csv"), t = read_file(root_ / "t.csv");
  EXPECT_EQ(s.substr(0, s.find('\n')), "re_lambda,im_lambda,multiplicity,residual,trusted");
  EXPECT_EQ(t.substr(0, t.find('\n')), "t,re_T,im_T,abs_T");
  const json peaks = json::parse(read_file(root_ / "p.json"));
  ASSERT_TRUE(peaks.is_array());
  ASSERT_FALSE(peaks.empty());
  for (const char *k : {"t_peak", "a_fit_re", "a_fit_im", "abs_a_fit", "matched_period", "orbit_ids",
                        "predicted_modulus", "ratio"})
    EXPECT_TRUE(peaks[0].contains(k)) << k;
  EXPECT_THROW(export_artifact(out, "forms", "json", root_ / "f.json"), std::runtime_error);
  EXPECT_THROW(export_artifact(out, "spectrum", "xml", root_ / "x"), std::runtime_error);
}
