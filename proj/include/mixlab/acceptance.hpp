#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mixlab {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 42;
  /// CSV artifacts land here; nothing is written when empty.
  std::filesystem::path out_dir;
  /// Criterion 11 reruns `cli repro` with 1 and 8 threads and compares the
  /// CSV bytes. Skipped (reported as FAIL) when `cli` is empty.
  bool determinism = true;
  std::filesystem::path cli;
  /// Restrict to these criterion ids; empty runs all.
  std::vector<int> only;
};

/// Runs the acceptance criteria in order. Never throws for a failing check;
/// an exception inside a criterion is reported as its FAIL detail.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// One "PASS|FAIL <id> <title> (<seconds> s): <detail>" line per criterion.
std::string acceptance_table(const std::vector<CriterionResult>& results);

}  // namespace mixlab
