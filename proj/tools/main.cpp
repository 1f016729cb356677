#include <iostream>
#include <string>
#include <vector>

#include "betting/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return betting::run_cli(args, std::cout, std::cerr);
}
