#include <string>
#include <vector>

#include "bpmr_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bpmr::cli::run_cli(std::move(args));
}
