#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kvstring {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool passed = false;
  std::string details;
};

struct AcceptanceOptions {
  bool quick = false;      // run the fast oracle-equivalence checks only
  int criterion = 0;       // 0 = all, otherwise a single criterion index
  unsigned threads = 0;    // 0 = hardware default
};

// Runs the verification criteria, printing one PASS/FAIL line per criterion
// to `log` as they complete. Results are returned for programmatic use.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& log);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace kvstring
