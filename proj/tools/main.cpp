#include <iostream>
#include <string>
#include <vector>

#include "ccdos/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ccdos::cli::run(args, std::cout, std::cerr);
}
