#pragma once

// Run configuration: command-line flags and flat `key = value` files.

#include "hartree_lab/solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hartree_lab {

enum class Command { solve, sweep, critical, finite_n, two_body, sample, lln, checks };
std::string to_string(Command command);
std::optional<Command> parse_command(const std::string &text);

enum class OutputFormat { json_lines, csv };
std::string to_string(OutputFormat format);

/// "auto" picks the adaptive grid for solves and sweeps and the threshold
/// grid for critical-coupling searches; "uniform" uses nodes and r_max
/// (r_max = 0 means 40/λ).
struct GridConfig {
  std::string scheme = "auto";
  std::size_t nodes = 4000;
  double r_max = 0.0;
};

struct RunConfig {
  Command command = Command::solve;

  double lambda = 1.0;
  std::vector<double> lambda_list;
  double bracket_lo = 0.5;
  double bracket_hi = 1.0;
  double width = 1e-3;

  GridConfig grid;
  SolverOptions solver;
  double repulsion = 1.0;    // g in ½𝒦 − λ𝒞 + (g/2)ℐ
  double trap = 0.0;         // > 0 selects the harmonic trap
  double pair_width = 0.5;   // Gaussian pair kernel width for the trap
  double pair_strength = 0.0;

  std::vector<std::size_t> n_list; // empty: command default
  int order = 1;
  double epsilon = 0.1;
  int repetitions = 50;
  std::uint64_t seed = 0;
  int directions = 64;
  std::size_t samples = 1000;

  double kappa = 0.5;
  int exponents = 6;
  double exponent_lo = 0.4;
  double exponent_hi = 4.0;
  std::string family = "product-exponential-plus-r12";

  std::string output = "-"; // "-" is standard output
  OutputFormat format = OutputFormat::json_lines;

  std::vector<std::size_t> effective_n_list() const;
};

nlohmann::json to_json(const RunConfig &config);

struct ConfigParse {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;
  bool help = false;
  std::string help_text;
};

/// Parses `command [--key value ...] [--config FILE]`. File keys use the
/// flag names (dashes or underscores); flags override the file. Every error
/// found is reported, not just the first.
ConfigParse parse_config(const std::vector<std::string> &args);
ConfigParse parse_config(int argc, const char *const *argv);

/// Reads a flat `key = value` file; '#' and ';' start comments.
std::vector<std::pair<std::string, std::string>> read_key_values(const std::string &path,
                                                                 std::vector<std::string> &errors);

} // namespace hartree_lab
