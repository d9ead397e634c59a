#pragma once

#include <string>
#include <vector>

namespace erbfit {

// Command-line front end: sparsify | mesh | compare | report.
// Returns the process exit status (0 iff all requested outputs were written).
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace erbfit
