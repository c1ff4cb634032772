#include <iostream>
#include <string>
#include <vector>

#include "mmlhub/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mmlhub::run_cli(args, std::cout, std::cerr);
}
