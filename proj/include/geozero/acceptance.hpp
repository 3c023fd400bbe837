#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geozero {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;  // measured numbers behind the verdict
  double seconds = 0.0;
  double time_limit = 0.0;  // s, 0 when unbounded
};

struct AcceptanceOptions {
  std::vector<int> only;  // empty runs all ten
  unsigned threads = 0;
};

/// Runs the end-to-end acceptance criteria. Each one prints a single line
/// to `progress` (when given) as soon as it finishes. Exceptions inside a
/// criterion count as a failure of that criterion only.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {}, std::ostream* progress = nullptr);

/// "PASS [3] title: detail (1.2 s)"
std::string format_result(const CriterionResult& r);

}  // namespace geozero
