#include <string>
#include <vector>

#include "dcgkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dcgkit::cli::run(args);
}
