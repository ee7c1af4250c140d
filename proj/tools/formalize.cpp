#include <iostream>
#include <string>
#include <vector>

#include "formal/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return formal::run_command(args, std::cin, std::cout, std::cerr);
}
