#include "nsdde/cli.hpp"

int main(int argc, char** argv) {
  return nsdde::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
