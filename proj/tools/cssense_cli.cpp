#include <string>
#include <vector>

#include "cssense/io.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cssense::io::run_cli(args);
}
