#include <iostream>
#include <string>
#include <vector>

#include "qspec/cli.hpp"

int main(int argc, char** argv) {
  return qspec::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
