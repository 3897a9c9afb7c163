// Acceptance suite: runs every verification criterion at full resolution and
// prints one pass/fail line per criterion.  Exit status is nonzero when any
// criterion fails.

#include <iostream>

#include "tfb/verify.hpp"

int main() {
  const auto results = tfb::verify::run_verification(tfb::verify::Level::Full, std::cout);
  int failed = 0;
  for (const auto& r : results)
    if (!r.passed) ++failed;
  if (failed > 0) {
    std::cout << failed << " criteria FAILED\n";
    return 1;
  }
  return 0;
}
