#pragma once

#include <ostream>

namespace valfun {

/// Runs the command line; reports go to out, diagnostics to err.
/// Exit codes: 0 success, 1 usage error, 2 analysis failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace valfun
