#include <string>
#include <vector>

#include "localfactor/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return localfactor::cli_main(args);
}
