// SPDX-License-Identifier: Apache-2.0
//
// Artifact formats. Numbers are written in shortest round-trip form so that
// identical inputs give identical bytes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>
#include "json.hpp"
#include "kgspec/orbits.hpp"
#include "kgspec/pencil.hpp"
#include "kgspec/trace.hpp"

namespace kgspec
{

std::string format_double(double x);

// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path &path, const std::string &content);
std::string read_file(const std::filesystem::path &path);

// Two-space indented dump with a trailing newline; non-finite numbers become null.
std::string dump_json(const nlohmann::json &j);

// FNV-1a, 64 bit.
std::uint64_t content_hash(const std::string &bytes);
std::string hex64(std::uint64_t v);

// re_lambda,im_lambda,multiplicity,residual,trusted -- trusted clusters as one
// row with their multiplicity, rejected-by-tail modes one row each.
std::string spectrum_csv(const SpectrumResult &spec, double cluster_tol = 1e-6);
TraceInput trace_input_from_csv(const std::string &csv, double cutoff, double tol_real = 1e-7);

// period,primitive_period,winding_1..winding_d,det_I_minus_P,stability,closure_defect
std::string orbits_csv(const std::vector<PeriodicOrbit> &orbits);
std::vector<PeriodicOrbit> orbits_from_csv(const std::string &csv);

// t,re_T,im_T,abs_T
std::string trace_csv(const TraceProfile &profile);

// [{t_peak, a_fit_re, a_fit_im, abs_a_fit, matched_period, orbit_ids, predicted_modulus, ratio}]
nlohmann::json peaks_json(const PeakReport &report);

}  // namespace kgspec
