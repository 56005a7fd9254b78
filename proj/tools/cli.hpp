#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace shadow_audit {

/// Runs the command line `args` (without the program name). Reports go to
/// `out`, diagnostics to `err`. Returns 0 when everything passes, 1 when the
/// audit found a divergence, 2 for usage, parse and evaluation errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shadow_audit
