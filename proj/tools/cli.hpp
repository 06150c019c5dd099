#pragma once

#include <ostream>

namespace gppsim {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2, kComparisonFailed = 3 };

/// Entry point shared by main() and the tests. Never calls std::exit.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gppsim
