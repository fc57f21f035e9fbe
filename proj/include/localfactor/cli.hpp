#pragma once

#include <string>
#include <vector>

namespace localfactor {

// Full command-line entry point (args without the program name). Exposed so
// tests can drive subcommands in-process.
int cli_main(const std::vector<std::string>& args);

}  // namespace localfactor
