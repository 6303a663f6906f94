// Acceptance suite driver: one pass/fail line per criterion, nonzero exit on
// any failure. Equivalent to `abering check --scale full`.

#include <algorithm>
#include <iostream>
#include <thread>

#include "abering/check_suite.hpp"

int main() {
  const int threads =
      static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto report =
      abering::run_check_suite(abering::CheckScale::Full, threads, &std::cout);
  std::cout << (report.all_pass() ? "ALL CHECKS PASSED" : "CHECKS FAILED")
            << "\n";
  return report.all_pass() ? 0 : 1;
}
