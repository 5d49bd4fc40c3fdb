#include <string>
#include <vector>

#include "dstf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dstf::cli::run(args);
}
