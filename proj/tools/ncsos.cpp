#include <iostream>

#include "ncsos/cli.hpp"

int main(int argc, char** argv) {
  return ncsos::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
