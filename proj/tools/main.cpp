#include "workstate/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return workstate::cli::run(argc, argv, std::cout, std::cerr);
}
