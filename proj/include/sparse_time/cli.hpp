#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sparsetime {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitData = 2,
    kExitNumerical = 3,
};

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sparsetime
