#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return magnetic_gaps::cli::dispatch(args, std::cout, std::cerr);
}
