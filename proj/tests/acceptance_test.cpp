// Runs the ten acceptance criteria and prints one PASS/FAIL line per criterion.
// Usage: acceptance_test [artifact-dir]

#include <iostream>

#include "discforge/acceptance.hpp"

int main(int argc, char** argv) {
  discforge::SuiteOptions opt;
  if (argc > 1) opt.out_dir = argv[1];
  bool all = true;
  for (const auto& r : discforge::run_suite(opt)) {
    std::cout << discforge::result_line(r) << std::endl;
    all = all && r.pass;
  }
  return all ? 0 : 1;
}
