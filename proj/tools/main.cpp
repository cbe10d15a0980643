#include <string>
#include <vector>

#include "rydthz/experiments.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rydthz::run_cli(args);
}
