#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sustain::cli {

/// Command dispatch for the sustain tool. args excludes the program name.
/// Returns 0 on success, 1 on data errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sustain::cli
