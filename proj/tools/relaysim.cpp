#include "relaysim_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return relaysim::cli::run_cli(std::move(args));
}
