#include <iostream>
#include <string>
#include <vector>

#include "qrc/cli.hpp"

int main(int argc, char** argv) {
  return qrc::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
