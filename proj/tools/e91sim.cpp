#include <iostream>
#include <string>
#include <vector>

#include "e91/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return e91::cli::main(args, std::cout, std::cerr);
}
