// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <iostream>
#include <string>

#include "stagger/acceptance.hpp"

int main(int argc, char** argv) {
  unsigned long seed = 1;
  if (argc > 1) seed = std::strtoul(argv[1], nullptr, 10);
  int failed = 0;
  stagger::acceptance::run_all(seed, [&](const stagger::acceptance::Result& r) {
    if (!r.pass) ++failed;
    std::cout << stagger::acceptance::format(r) << std::endl;
  });
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << std::endl;
  return failed == 0 ? 0 : 1;
}
