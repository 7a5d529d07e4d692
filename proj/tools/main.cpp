#include <iostream>
#include <string>
#include <vector>

#include "cantordim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cantordim::run_cli(args, std::cout, std::cerr);
}
