// End-to-end acceptance criteria, one PASS/FAIL line each.

#include <iostream>

#include "geozero/acceptance.hpp"

int main() {
  const auto results = geozero::run_acceptance({}, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
