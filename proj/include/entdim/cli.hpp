#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace entdim {

/// Runs the entdim command line on `args` (without the program name).
/// Returns 0 on success, 1 when a result is flagged, a bound is violated or a
/// verify check fails, and 2 on usage errors, including malformed measure specs.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace entdim
