#include <iostream>
#include <string>
#include <vector>

#include "dac/evalcli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return dac::run_cli(args, std::cout, std::cerr);
}
