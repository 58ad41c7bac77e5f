#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sgronwall::cli {

/// Process exit codes of the `sgronwall` tool.
enum class ExitCode : int {
    success = 0,
    config_error = 2,
    contract_violation = 3,
    solver_failure = 4,
    verification_failure = 5,
};

/// Environment variable consulted when no --seed is given.
inline constexpr const char* kSeedEnvVar = "SGRONWALL_SEED";

/// Run the command line (without the program name). Reports go to `out`
/// unless --output names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sgronwall::cli
