#include <iostream>
#include <string>
#include <vector>

#include "feshrf/commands.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return feshrf::cli::run_cli(args, std::cout, std::cerr);
}
