#ifndef SNIS_CLI_HPP
#define SNIS_CLI_HPP

#include <string>
#include <vector>

namespace snis {

// Runs one CLI command. args excludes the program name. Exit codes:
// 0 success, 1 usage error, 2 I/O error, 3 numerical failure (sigma
// escalation exhausted / all weights zero).
int run_cli(const std::vector<std::string>& args);

}  // namespace snis

#endif
