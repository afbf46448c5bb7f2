#include <iostream>

#include "pisd/cli.hpp"

int main(int argc, char** argv) {
  return pisd::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
