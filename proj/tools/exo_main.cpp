#include <iostream>
#include <string>
#include <vector>

#include "exo/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return exo::run_cli(args, std::cout, std::cerr);
}
