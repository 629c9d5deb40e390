#include <iostream>

#include "qrsim/cli/commands.hpp"

int main(int argc, char** argv) {
  return qrsim::cli::run_cli(argc, argv, std::cout, std::cerr);
}
