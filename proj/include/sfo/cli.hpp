#pragma once

#include <string>
#include <vector>

namespace sfo {

// Command-line driver: gen | sfo | rank | report. Exit codes: 0 success,
// 2 invalid arguments or configuration, 3 I/O failure, 4 optimization
// failure. Callable with argv-style arguments (program name excluded in the
// vector form) so tests can drive it in-process.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace sfo
