#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace abering {

enum class CheckScale { Small, Full };

struct CriterionResult {
  std::string id;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct CheckReport {
  CheckScale scale = CheckScale::Small;
  std::vector<CriterionResult> criteria;

  bool all_pass() const {
    for (const auto& c : criteria) {
      if (!c.pass) return false;
    }
    return true;
  }
};

// Runs the acceptance matrix: ten criteria covering unique-leader
// correctness, the invariant suite (monitored runs plus exhaustive
// enumeration), the closed-form optimum and its asymptotics, chain
// termination, the tuned-parameter sweep, linear scaling, the analytic time
// bound, pinned small values, and end-to-end determinism. Small scale trims
// run counts and ring sizes for a quick smoke pass; Full runs the criteria
// at their stated sizes and tolerances.
//
// Prints one "Cx name: PASS/FAIL (detail)" line per criterion to `progress`
// as results arrive.
CheckReport run_check_suite(CheckScale scale, int threads,
                            std::ostream* progress = nullptr);

std::string report_to_json(const CheckReport& report);

}  // namespace abering
