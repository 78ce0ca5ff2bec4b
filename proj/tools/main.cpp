#include <iostream>
#include <string>
#include <vector>

#include "truelearn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return truelearn::run_cli(args, std::cout, std::cerr, truelearn::detect_env());
}
