#ifndef NETHIST_TOOLS_CLI_H_
#define NETHIST_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace nethist::cli {

// Runs one subcommand (fit, bandwidth, simulate, evaluate, covariates) and
// returns the process exit code: 0 success, 1 numerical or procedural
// failure, 2 I/O, 3 configuration.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nethist::cli

#endif  // NETHIST_TOOLS_CLI_H_
