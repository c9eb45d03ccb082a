#include <iostream>

#include "biot/acceptance.hpp"

int main() {
  const auto results = biot::run_acceptance(std::cout);
  const bool ok = biot::all_passed(results);
  std::cout << (ok ? "ACCEPTANCE: ALL CRITERIA PASSED" : "ACCEPTANCE: FAILURES PRESENT") << '\n';
  return ok ? 0 : 1;
}
