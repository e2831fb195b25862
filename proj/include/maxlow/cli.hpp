#pragma once

#include <ostream>

namespace maxlow {

enum ExitCode { exit_ok = 0, exit_validation_failed = 1, exit_config_error = 2, exit_solver_failure = 3 };

// Entry point of the maxlow command line tool. Results go to `out` (or the
// --out file), diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace maxlow
