// Verification-criteria runner: one line per criterion, nonzero exit when a
// criterion fails. `--criterion N` restricts to a single criterion, `--quick`
// runs the fast oracle-equivalence checks only.
#include <cstring>
#include <iostream>
#include <string>

#include "kvstring/acceptance.hpp"

int main(int argc, char** argv) {
  kvstring::AcceptanceOptions options;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--quick") {
      options.quick = true;
    } else if (arg == "--criterion" && i + 1 < argc) {
      options.criterion = std::atoi(argv[++i]);
    } else if (arg == "--threads" && i + 1 < argc) {
      options.threads = static_cast<unsigned>(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--quick] [--criterion N] [--threads T]\n";
      return 1;
    }
  }
  try {
    const auto results = kvstring::run_acceptance(options, std::cout);
    return kvstring::all_passed(results) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance runner error: " << e.what() << "\n";
    return 2;
  }
}
