#include <iostream>
#include <string>
#include <vector>

#include "request/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return request::run_cli(args, std::cout, std::cerr);
}
