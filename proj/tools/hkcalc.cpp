#include <iostream>
#include <string>
#include <vector>

#include "hkcalc/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  hkcalc::cli::CommandPlan plan;
  try {
    plan = hkcalc::cli::parse(args);
  } catch (const hkcalc::cli::UsageError& e) {
    std::cerr << "hkcalc: " << e.what() << "\nRun 'hkcalc --help' for usage.\n";
    return 2;
  }
  if (!plan.help.empty()) {
    std::cout << plan.help;
    return 0;
  }
  return hkcalc::cli::execute(plan, std::cout, std::cerr);
}
