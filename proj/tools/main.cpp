#include <iostream>

#include "flightstab/cli.hpp"

int main(int argc, char** argv) {
  return flightstab::cli::run_command(argc, argv, std::cout, std::cerr);
}
