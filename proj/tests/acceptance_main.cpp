// SPDX-License-Identifier: Apache-2.0
//
// Runs the fourteen acceptance criteria and prints one PASS/FAIL line each.
// --quick uses the reduced grids; exit status 1 if any criterion fails.

#include <cstring>
#include <iostream>
#include "kgspec/acceptance.hpp"
#include "kgspec/lapack.hpp"

int main(int argc, char **argv)
{
  kgspec::ensure_sound_blas(argv);
  kgspec::AcceptanceOptions opts;
  opts.quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  opts.progress = [](const std::string &line) { std::cout << line << std::flush; };
  const auto results = kgspec::run_acceptance(opts);
  int failed = 0;
  for (const auto &r : results)
    failed += r.pass ? 0 : 1;
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria pass\n";
  return failed == 0 ? 0 : 1;
}
