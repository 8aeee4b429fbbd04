#include <iostream>
#include <string>
#include <vector>

#include "touchreg/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return touchreg::cli::run(args, std::cout, std::cerr);
}
