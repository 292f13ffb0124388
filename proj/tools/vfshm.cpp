#include <iostream>
#include <string>
#include <vector>

#include "vfshm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return vfshm::cli_dispatch(args, std::cout, std::cerr);
}
