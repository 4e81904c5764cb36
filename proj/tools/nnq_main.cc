#include <iostream>
#include <string>
#include <vector>

#include "nnq/cli.h"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return nnq::run_command(args, std::cout, std::cerr);
}
