#pragma once

// The acceptance grid: ten criteria, each a deterministic experiment that
// yields a verdict and a JSON data artifact.  Shared by the acceptance test
// binary and the `suite` command.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "discforge/report.hpp"

namespace discforge {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  Json data;  ///< deterministic; no timings
  double seconds = 0.0;
};

/// Ids 1..10 in order.
std::vector<int> criterion_ids();
std::string criterion_title(int id);

/// Runs one of the data criteria 1..9.
CriterionResult run_criterion(int id);

struct SuiteOptions {
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> out_dir;
  /// Subset of ids to run (empty = all ten).  Criterion 10 reruns whichever
  /// of 1..9 are selected.
  std::vector<int> only;
};

/// Runs the selected criteria; criterion 10 reruns every data criterion and
/// compares the serialized artifacts byte for byte.  With out_dir set, writes
/// `suite_c<id>.json` per criterion and `suite_table.csv`.
std::vector<CriterionResult> run_suite(const SuiteOptions& options);

/// "criterion  3  PASS  <title>  (<seconds> s)  <detail>"
std::string result_line(const CriterionResult& r);

}  // namespace discforge
