#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hkcalc/regulated.hpp"

namespace hkcalc::cli {

class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct CommandPlan {
  std::string subcommand;
  std::uint64_t seed = 42;
  std::string matrix_path;
  std::string fn;     ///< short form, inline JSON, or path to a .json file
  std::string model;  ///< "finite", "continuum:a,b[,samples]", unbounded model spec
  std::string config_path;
  std::string samples_path;
  std::string out_path;  ///< empty: stdout
  std::string format = "json";
  double eps = 1e-10;
  std::size_t grid = 128;
  std::vector<std::size_t> levels;
  bool error_json = false;
  std::string help;  ///< non-empty when --help was requested
};

/// Arguments without the program name. Throws UsageError on unknown
/// subcommands or flags, missing required options and malformed values.
CommandPlan parse(const std::vector<std::string>& args);

/// Runs the plan, writing the artifact to plan.out_path (or `out`) and
/// diagnostics to `err`. Returns 0 on success, 1 on a failed verification or
/// module error.
int execute(const CommandPlan& plan, std::ostream& out, std::ostream& err);

/// Function specification: short form ("heaviside:0.5", "thomae:inf", ...),
/// inline JSON object, or a path ending in .json. `k` is used unless the
/// specification names its own domain.
RegulatedFn parse_function(const std::string& spec, Domain k);

/// Shortest decimal string that reads back to the same double.
std::string format_number(double x);

}  // namespace hkcalc::cli
