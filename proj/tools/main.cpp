#include <iostream>

#include "polaron2d/cli.hpp"

int main(int argc, char** argv) {
  return polaron2d::cli_main(argc, argv, std::cout, std::cerr);
}
