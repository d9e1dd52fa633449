#include <string>
#include <vector>

#include "rocket/cli.hpp"

int main(int argc, char** argv) {
  return rocket::run_cli(std::vector<std::string>(argv, argv + argc));
}
