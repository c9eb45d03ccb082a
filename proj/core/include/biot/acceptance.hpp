#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace biot {

/// Outcome of one acceptance criterion.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the full acceptance suite for the solver stack. Each criterion
/// prints one PASS/FAIL line to `log` as it finishes, so partial progress
/// is visible even if a later criterion throws.
std::vector<CriterionResult> run_acceptance(std::ostream& log);

/// True when every criterion in `results` passed.
bool all_passed(const std::vector<CriterionResult>& results);

/// Sanity-checks a benchmark results CSV: schema, value ranges, and that
/// every non-skipped row converged. Returns human-readable issues, empty
/// when the file is clean.
std::vector<std::string> verify_results_file(const std::string& path);

}  // namespace biot
