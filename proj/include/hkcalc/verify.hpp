#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hkcalc {

struct CheckResult {
  std::string name;
  double worst;  ///< largest residual (or violation) seen
  double tol;
  bool pass;
};

/// Seeded invariant battery behind `hkcalc verify`. Deterministic given the seed.
std::vector<CheckResult> run_battery(std::uint64_t seed);

}  // namespace hkcalc
