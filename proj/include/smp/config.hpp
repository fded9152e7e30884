#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smp/coefficients.hpp"
#include "smp/optimizer.hpp"
#include "smp/problem.hpp"

namespace smp {

// Strict TOML subset: [tables], key = value with strings, booleans, integers,
// floats and flat arrays of numbers.  Comments with '#'.  Duplicate keys and
// syntax errors are rejected with line numbers.
struct TomlValue {
  std::variant<std::string, bool, std::int64_t, double, std::vector<double>> v;
  int line = 0;
};
using TomlTable = std::map<std::string, TomlValue>;
using TomlDoc = std::map<std::string, TomlTable>;

TomlDoc parse_toml(const std::string& text);
TomlDoc parse_toml_file(const std::string& path);

// Parsed and validated run description.  Construction runs the assumption
// validator on the coefficient family; invalid data is rejected with the
// failing hypothesis and margin.
struct ProblemConfig {
  // domain
  std::string domain_kind;  // "interval" | "rectangle"
  IntervalDesc interval;
  RectangleDesc rectangle;
  std::string y0_kind = "constant";
  double y0_value = 0.0;

  // time
  double horizon = 1.0;
  int steps = 1;

  // coefficients
  std::string family;  // "lq-dbc" | "semilinear-dbc"
  BuiltinParams params;

  // noise
  bool noise_enabled = false;
  int k_interior = 0, k_boundary = 0;
  double sigma0 = 0.0, decay = 1.0;

  std::uint64_t master_seed = 0;

  OptimizerOptions optimizer;
};

// Strict load: unknown keys/sections are rejected; assumption validation runs
// on the assembled coefficient family.
ProblemConfig load_config(const std::string& path);
ProblemConfig config_from_doc(const TomlDoc& doc, const std::string& origin);

Problem build_problem(const ProblemConfig& cfg);

}  // namespace smp
