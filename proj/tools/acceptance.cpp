// Acceptance suite: one PASS/FAIL line per criterion.
//
//   mixlab_acceptance [--seed N] [--out DIR]
//
// The exit code is 0 only when every criterion passes; the final
// "criteria evaluated" line marks a complete run.

#include <CLI11.hpp>

#include <iostream>

#include "mixlab/acceptance.hpp"

#ifndef MIXLAB_CLI_PATH
#define MIXLAB_CLI_PATH ""
#endif

int main(int argc, char** argv) {
  CLI::App app{"mixlab acceptance suite"};
  mixlab::AcceptanceOptions opt;
  std::string out;
  std::string cli = MIXLAB_CLI_PATH;
  app.add_option("--seed", opt.seed, "master seed");
  app.add_option("--out", out, "directory for CSV artifacts");
  app.add_option("--cli", cli, "mixlab executable used by the determinism check");
  app.add_option("--only", opt.only, "criterion ids to run");
  CLI11_PARSE(app, argc, argv);
  opt.out_dir = out;
  opt.cli = cli;

  const auto results = mixlab::run_acceptance(opt);
  std::cout << mixlab::acceptance_table(results);
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  std::cout << "criteria evaluated: " << results.size() << ", passed: " << passed << "\n";
  return passed == results.size() ? 0 : 1;
}
