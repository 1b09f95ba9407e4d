#include <iostream>
#include <string>
#include <vector>

#include "cloakvit/cli.hpp"

int main(int argc, char** argv) {
  return cloakvit::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
