#include <iostream>

#include "hotelling/cli.hpp"

int main(int argc, char** argv) {
  return hotelling::run_cli(argc, argv, std::cout, std::cerr);
}
