#include <iostream>

#include "gpkdv/cli.hpp"

int main(int argc, char** argv) {
  return gpkdv::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
