#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fraceig {

/// Runs the command-line front end; returns the process exit code.
/// Machine output goes to `out` unless an --out path is given.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fraceig
