#include <iostream>
#include <vector>

#include "bcq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bcq::cli::run_command(args, std::cout, std::cerr);
}
