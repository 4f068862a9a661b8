// Command-line front end. Exit codes: 0 success, 1 runtime failure, 2 invalid input.
#pragma once

#include <iosfwd>

namespace hs {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace hs
