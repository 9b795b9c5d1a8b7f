#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kvstring/model.hpp"

namespace kvstring {

enum class CommandKind { simulate, spectrum, resolvent, hardy, table, verify };

struct Command {
  CommandKind kind = CommandKind::table;
  RunConfig config;

  // command-specific extras
  std::string initial_kind = "graph_normalized";  // simulate
  int sample_every = 0;                           // simulate; 0 = choose automatically
  std::vector<double> alphas;                     // table, spectrum branch tracing
  int k_max = 8;                                  // spectrum branch tracing
  std::vector<double> shifts;                     // spectrum shift-invert mode
  std::string spacing = "log";                    // resolvent scan grid
  double cap_divisor = 10.0;                      // omega_cap policy constant
  bool dump_matrices = false;
  bool quick = false;                             // verify
  int criterion = 0;                              // verify; 0 = all
  unsigned threads = 0;                           // 0 = hardware default
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses arguments (without the program name). A --config FILE is read first
// (JSON, keys exactly the RunConfig field names); explicit flags override it.
Command parse_args(const std::vector<std::string>& args);

// Executes a parsed command, writing artifacts under config.output_dir.
// Returns the process exit status: 0 success, 2 computation failure,
// 3 acceptance failure.
int run(const Command& command);

// Full entry point: parse, validate, run; maps usage problems to status 1.
int cli_main(int argc, const char* const* argv);

}  // namespace kvstring
