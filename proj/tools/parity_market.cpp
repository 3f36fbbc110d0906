#include <string>
#include <vector>

#include "parity_market/cli.hpp"

int main(int argc, char** argv) {
  return parity_market::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
