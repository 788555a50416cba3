#include <iostream>
#include <string>
#include <vector>

#include "varcalc/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return varcalc::run_cli(args, std::cout, std::cerr);
}
