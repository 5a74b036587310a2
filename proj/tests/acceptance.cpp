// Runs the ten acceptance criteria and prints one line per criterion.

#include <cstdio>

#include "thermocap/verify.hpp"

int main() {
  thermocap::verify::Suite suite;
  int failed = 0;
  suite.run_all([&](const thermocap::verify::Outcome& r) {
    std::printf("[%s] criterion %d: %s | %s | %.1fs\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    failed += !r.passed;
  });
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
