#include <iostream>
#include <string>
#include <vector>

#include "p2pq/cli/app.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return p2pq::cli::run(args, std::cout, std::cerr);
}
