#include <string>
#include <vector>

#include "slimtag/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return slimtag::run_cli(args);
}
