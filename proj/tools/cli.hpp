#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "settings.hpp"

namespace clauseviz::cli {

/// Runs `clauseviz <args...>` (args excludes the program name). Returns the
/// exit code: 0 success, 1 usage error, 2 runtime error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env());

}  // namespace clauseviz::cli
