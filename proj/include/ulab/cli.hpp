#pragma once

#include <string>
#include <vector>

namespace ulab {

// Batch front door. `args` are the command-line tokens after the program name.
// Returns the process exit code: 0 success, 2 input error, 3 guard violation,
// 4 selftest failure. Reports go to --out or stdout; identical args and seed
// produce byte-identical reports regardless of --threads.
int run_cli(const std::vector<std::string>& args);

}  // namespace ulab
