// SPDX-License-Identifier: Apache-2.0
//
// Stage execution with a content-addressed result store.
//
// Layout of the output directory:
//
//   <out>/cache/<stage>-<key>/...   stage artifacts, keyed by a hash of the
//                                   inputs that stage depends on
//   <out>/<artifact>                copies of the latest run's artifacts
//   <out>/manifest.json             config hash, version, per-stage key, cache
//                                   hit flag, timings (rewritten atomically)
//   <out>/summary.txt               human-readable digest
//
// Downstream stages always read their inputs back from the stored artifacts,
// so a cached run and a fresh run feed identical bytes forward.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>
#include "kgspec/config.hpp"

namespace kgspec
{

inline constexpr const char *kVersion = "kgspec 1.0.0";

struct StageOutcome
{
  Stage stage = Stage::Spectrum;
  std::string key;
  bool cached = false;
  bool ok = false;
  double seconds = 0.0;
  std::vector<std::string> files;
  std::string error;
  int exit_code = 0;  // 0, 1 (numerical), 2 (config), 3 (verification failures)
};

struct PipelineResult
{
  std::vector<StageOutcome> stages;
  int exit_code = 0;
  std::string summary;
};

using Artifacts = std::map<std::string, std::string>;  // file name -> bytes

PipelineResult run_pipeline(const RunConfig &cfg, const std::function<void(const std::string &)> &log = {});

// Cache key of one stage for a configuration.
std::string stage_key(const RunConfig &cfg, Stage stage);

// Copies an artifact of the latest run to dest (export subcommand).
void export_artifact(const std::filesystem::path &out_dir, const std::string &what, const std::string &format,
                     const std::filesystem::path &dest);

}  // namespace kgspec
