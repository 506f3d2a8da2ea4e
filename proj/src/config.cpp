#include "hartree_lab/config.hpp"

#include "hartree_lab/error.hpp"

#include <CLI11/CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hartree_lab {

namespace {

using Errors = std::vector<std::string>;

std::string trim(const std::string &s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos)
    return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string canonical_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::optional<double> to_double(const std::string &text) {
  double v = 0.0;
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::optional<long long> to_integer(const std::string &text) {
  long long v = 0;
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    return std::nullopt;
  return v;
}

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ','))
    out.push_back(trim(item));
  return out;
}

// Each setter validates its own value and appends messages to `errors`.
using Setter = std::function<void(RunConfig &, const std::string &, Errors &)>;

struct Key {
  std::string name;
  std::string help;
  Setter set;
};

Setter real(double RunConfig::*field, std::function<bool(double)> ok, std::string rule,
            std::string name) {
  return [=](RunConfig &c, const std::string &v, Errors &e) {
    const auto x = to_double(v);
    if (!x)
      e.push_back(name + " must be a number, got '" + v + "'");
    else if (!ok(*x))
      e.push_back(name + " must be " + rule);
    else
      c.*field = *x;
  };
}

template <class T>
Setter integer(std::function<T &(RunConfig &)> field, long long lo, long long hi,
               std::string name) {
  return [=](RunConfig &c, const std::string &v, Errors &e) {
    const auto x = to_integer(v);
    if (!x)
      e.push_back(name + " must be an integer, got '" + v + "'");
    else if (*x < lo || *x > hi)
      e.push_back(name + " must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    else
      field(c) = static_cast<T>(*x);
  };
}

Setter choice(std::function<void(RunConfig &, const std::string &)> apply,
              std::vector<std::string> allowed, std::string name) {
  return [=](RunConfig &c, const std::string &v, Errors &e) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto &a : allowed)
        list += (list.empty() ? "" : ", ") + a;
      e.push_back(name + " must be one of {" + list + "}, got '" + v + "'");
    } else {
      apply(c, v);
    }
  };
}

const std::vector<Key> &keys() {
  static const std::vector<Key> table = [] {
    auto positive = [](double x) { return x > 0.0; };
    auto non_negative = [](double x) { return x >= 0.0; };
    std::vector<Key> k;
    k.push_back({"lambda", "attraction coupling λ > 0",
                 real(&RunConfig::lambda, positive, "> 0", "lambda")});
    k.push_back({"lambda-list", "comma-separated ascending couplings",
                 [](RunConfig &c, const std::string &v, Errors &e) {
                   std::vector<double> out;
                   for (const auto &item : split_list(v)) {
                     const auto x = to_double(item);
                     if (!x || !(*x > 0.0)) {
                       e.push_back("lambda-list entries must be numbers > 0, got '" + item + "'");
                       return;
                     }
                     out.push_back(*x);
                   }
                   if (out.empty())
                     e.push_back("lambda-list must not be empty");
                   else if (std::adjacent_find(out.begin(), out.end(), std::greater_equal<>()) !=
                            out.end())
                     e.push_back("lambda-list must be strictly ascending");
                   else
                     c.lambda_list = out;
                 }});
    k.push_back({"bracket-lo", "lower coupling of the critical bracket",
                 real(&RunConfig::bracket_lo, positive, "> 0", "bracket-lo")});
    k.push_back({"bracket-hi", "upper coupling of the critical bracket",
                 real(&RunConfig::bracket_hi, positive, "> 0", "bracket-hi")});
    k.push_back({"width", "target bracket width for the critical search",
                 real(&RunConfig::width, positive, "> 0", "width")});
    k.push_back({"grid", "auto, uniform or threshold",
                 choice([](RunConfig &c, const std::string &v) { c.grid.scheme = v; },
                        {"auto", "uniform", "threshold"}, "grid")});
    k.push_back({"nodes", "uniform grid node count",
                 integer<std::size_t>([](RunConfig &c) -> std::size_t & { return c.grid.nodes; },
                                      16, 2000000, "nodes")});
    k.push_back({"r-max", "uniform grid radius (0: 40/λ)",
                 [](RunConfig &c, const std::string &v, Errors &e) {
                   const auto x = to_double(v);
                   if (!x || *x < 0.0)
                     e.push_back("r-max must be a number >= 0");
                   else
                     c.grid.r_max = *x;
                 }});
    k.push_back({"mixing", "density mixing α in (0, 1]",
                 [](RunConfig &c, const std::string &v, Errors &e) {
                   const auto x = to_double(v);
                   if (!x || !(*x > 0.0 && *x <= 1.0))
                     e.push_back("mixing must be in (0, 1]");
                   else
                     c.solver.mixing = *x;
                 }});
    k.push_back({"max-iterations", "SCF iteration cap",
                 integer<int>([](RunConfig &c) -> int & { return c.solver.max_iterations; }, 1,
                              1000000, "max-iterations")});
    k.push_back({"tolerance", "SCF residual tolerance",
                 [](RunConfig &c, const std::string &v, Errors &e) {
                   const auto x = to_double(v);
                   if (!x || !(*x > 0.0))
                     e.push_back("tolerance must be > 0");
                   else
                     c.solver.residual_tolerance = *x;
                 }});
    k.push_back({"initial-guess", "hydrogenic, gaussian or random-positive",
                 choice([](RunConfig &c, const std::string &v) {
                   c.solver.initial_guess = parse_initial_guess(v);
                 }, {"hydrogenic", "gaussian", "random-positive"}, "initial-guess")});
    k.push_back({"repulsion", "repulsion coupling g >= 0",
                 real(&RunConfig::repulsion, non_negative, ">= 0", "repulsion")});
    k.push_back({"trap", "harmonic trap strength (0: Coulomb model)",
                 real(&RunConfig::trap, non_negative, ">= 0", "trap")});
    k.push_back({"pair-width", "Gaussian pair kernel width",
                 real(&RunConfig::pair_width, positive, "> 0", "pair-width")});
    k.push_back({"pair-strength", "Gaussian pair kernel strength",
                 real(&RunConfig::pair_strength, non_negative, ">= 0", "pair-strength")});
    k.push_back({"n-list", "comma-separated particle numbers",
                 [](RunConfig &c, const std::string &v, Errors &e) {
                   std::vector<std::size_t> out;
                   for (const auto &item : split_list(v)) {
                     const auto x = to_integer(item);
                     if (!x || *x < 1 || *x > 100000000) {
                       e.push_back("n-list entries must be integers in [1, 1e8], got '" + item + "'");
                       return;
                     }
                     out.push_back(static_cast<std::size_t>(*x));
                   }
                   if (out.empty())
                     e.push_back("n-list must not be empty");
                   else
                     c.n_list = out;
                 }});
    k.push_back({"order", "U-statistic order",
                 integer<int>([](RunConfig &c) -> int & { return c.order; }, 1, 3, "order")});
    k.push_back({"epsilon", "exceedance threshold ε",
                 real(&RunConfig::epsilon, positive, "> 0", "epsilon")});
    k.push_back({"repetitions", "repetitions per N",
                 integer<int>([](RunConfig &c) -> int & { return c.repetitions; }, 1, 100000,
                              "repetitions")});
    k.push_back({"seed", "64-bit RNG seed",
                 [](RunConfig &c, const std::string &v, Errors &e) {
                   std::uint64_t x = 0;
                   const auto *end = v.data() + v.size();
                   const auto [ptr, ec] = std::from_chars(v.data(), end, x);
                   if (ec != std::errc() || ptr != end)
                     e.push_back("seed must be an unsigned 64-bit integer, got '" + v + "'");
                   else
                     c.seed = c.solver.seed = x;
                 }});
    k.push_back({"directions", "sliced-distance directions",
                 integer<int>([](RunConfig &c) -> int & { return c.directions; }, 1, 100000,
                              "directions")});
    k.push_back({"samples", "points to draw for the sample command",
                 integer<std::size_t>([](RunConfig &c) -> std::size_t & { return c.samples; }, 0,
                                      100000000, "samples")});
    k.push_back({"kappa", "two-body repulsion coupling κ >= 0",
                 real(&RunConfig::kappa, non_negative, ">= 0", "kappa")});
    k.push_back({"exponents", "two-body exponent count",
                 integer<int>([](RunConfig &c) -> int & { return c.exponents; }, 1, 12,
                              "exponents")});
    k.push_back({"exponent-lo", "smallest two-body exponent (times λ)",
                 real(&RunConfig::exponent_lo, positive, "> 0", "exponent-lo")});
    k.push_back({"exponent-hi", "largest two-body exponent (times λ)",
                 real(&RunConfig::exponent_hi, positive, "> 0", "exponent-hi")});
    k.push_back({"family", "two-body basis family",
                 choice([](RunConfig &c, const std::string &v) { c.family = v; },
                        {"product-exponential", "product-exponential-plus-r12"}, "family")});
    k.push_back({"output", "output path, '-' for standard output",
                 [](RunConfig &c, const std::string &v, Errors &e) {
                   if (v.empty())
                     e.push_back("output must not be empty");
                   else
                     c.output = v;
                 }});
    k.push_back({"format", "json-lines or csv",
                 choice([](RunConfig &c, const std::string &v) {
                   c.format = v == "csv" ? OutputFormat::csv : OutputFormat::json_lines;
                 }, {"json-lines", "csv"}, "format")});
    return k;
  }();
  return table;
}

const std::vector<std::pair<Command, std::string>> &command_names() {
  static const std::vector<std::pair<Command, std::string>> names{
      {Command::solve, "solve"},       {Command::sweep, "sweep"},
      {Command::critical, "critical"}, {Command::finite_n, "finite-n"},
      {Command::two_body, "two-body"}, {Command::sample, "sample"},
      {Command::lln, "lln"},           {Command::checks, "checks"}};
  return names;
}

void cross_validate(const RunConfig &c, Errors &e) {
  if (c.command == Command::sweep && c.lambda_list.empty())
    e.push_back("sweep needs lambda-list");
  if (c.bracket_hi <= c.bracket_lo)
    e.push_back("bracket-hi must exceed bracket-lo");
  if (c.exponent_hi < c.exponent_lo)
    e.push_back("exponent-hi must be >= exponent-lo");
  if (c.command == Command::lln)
    for (auto n : c.effective_n_list())
      if (n < static_cast<std::size_t>(c.order))
        e.push_back("n-list entries must be >= order for lln");
  if (c.command != Command::solve && c.repulsion != 1.0)
    e.push_back("repulsion applies to solve only");
  if (c.command != Command::solve && c.trap != 0.0)
    e.push_back("trap applies to solve only");
  if (c.command == Command::finite_n && c.lambda < 0.9)
    e.push_back("finite-n needs lambda >= 0.9");
}

} // namespace

std::string to_string(Command command) {
  for (const auto &[c, name] : command_names())
    if (c == command)
      return name;
  return "solve";
}

std::optional<Command> parse_command(const std::string &text) {
  for (const auto &[c, name] : command_names())
    if (name == text)
      return c;
  return std::nullopt;
}

std::string to_string(OutputFormat format) {
  return format == OutputFormat::csv ? "csv" : "json-lines";
}

std::vector<std::size_t> RunConfig::effective_n_list() const {
  if (!n_list.empty())
    return n_list;
  if (command == Command::lln)
    return {256, 1024, 4096};
  return {1, 2, 4, 8, 16};
}

nlohmann::json to_json(const RunConfig &c) {
  return {{"command", to_string(c.command)},
          {"lambda", c.lambda},
          {"lambda_list", c.lambda_list},
          {"bracket", {c.bracket_lo, c.bracket_hi}},
          {"width", c.width},
          {"grid", {{"scheme", c.grid.scheme}, {"nodes", c.grid.nodes}, {"r_max", c.grid.r_max}}},
          {"solver",
           {{"mixing", c.solver.mixing},
            {"max_iterations", c.solver.max_iterations},
            {"tolerance", c.solver.residual_tolerance},
            {"initial_guess", std::string(to_string(c.solver.initial_guess))},
            {"seed", c.solver.seed}}},
          {"repulsion", c.repulsion},
          {"trap", c.trap},
          {"pair_width", c.pair_width},
          {"pair_strength", c.pair_strength},
          {"n_list", c.effective_n_list()},
          {"order", c.order},
          {"epsilon", c.epsilon},
          {"repetitions", c.repetitions},
          {"seed", c.seed},
          {"directions", c.directions},
          {"samples", c.samples},
          {"kappa", c.kappa},
          {"exponents", c.exponents},
          {"exponent_range", {c.exponent_lo, c.exponent_hi}},
          {"family", c.family},
          {"output", c.output},
          {"format", to_string(c.format)}};
}

std::vector<std::pair<std::string, std::string>> read_key_values(const std::string &path,
                                                                 Errors &errors) {
  std::vector<std::pair<std::string, std::string>> out;
  std::ifstream in(path);
  if (!in) {
    errors.push_back("cannot read config file '" + path + "'");
    return out;
  }
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(path + ":" + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    out.emplace_back(canonical_key(trim(line.substr(0, eq))), value);
  }
  return out;
}

ConfigParse parse_config(const std::vector<std::string> &args) {
  ConfigParse result;
  CLI::App app{"Mean-field, two-body and sampling experiments for bosonic ions", "hartree-lab"};
  app.allow_extras();
  app.require_subcommand(0, 1);
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option *> options;
  for (const auto &key : keys())
    options[key.name] = app.add_option("--" + key.name, flag_values[key.name], key.help);
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value file; flags override it");
  std::map<std::string, CLI::App *> subcommands;
  for (const auto &[c, name] : command_names()) {
    auto *sub = app.add_subcommand(name, "run the " + name + " command");
    sub->fallthrough();
    sub->allow_extras();
    subcommands[name] = sub;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    result.help = true;
    result.help_text = app.help();
    return result;
  } catch (const CLI::ParseError &e) {
    result.errors.push_back(e.what());
    return result;
  }

  auto report_extras = [&](const std::vector<std::string> &extras) {
    for (std::size_t i = 0; i < extras.size(); ++i) {
      const auto &token = extras[i];
      if (token.rfind("-", 0) == 0) {
        const auto eq = token.find('=');
        result.errors.push_back("unknown key '" + token.substr(0, eq) + "'");
        if (eq == std::string::npos && i + 1 < extras.size() && extras[i + 1].rfind("-", 0) != 0)
          ++i;
      } else {
        result.errors.push_back("unexpected argument '" + token + "'");
      }
    }
  };
  report_extras(app.remaining());
  std::optional<Command> command;
  for (const auto &[name, sub] : subcommands)
    if (sub->parsed()) {
      command = parse_command(name);
      report_extras(sub->remaining());
    }

  RunConfig config;
  std::map<std::string, std::string> file_values;
  if (!config_path.empty()) {
    for (auto &[key, value] : read_key_values(config_path, result.errors)) {
      if (key == "command") {
        if (!command) {
          command = parse_command(value);
          if (!command)
            result.errors.push_back("unknown command '" + value + "'");
        }
      } else if (!options.count(key)) {
        result.errors.push_back("unknown key '" + key + "' in " + config_path);
      } else {
        file_values[key] = value;
      }
    }
  }
  if (!command) {
    result.errors.push_back("missing command (one of solve, sweep, critical, finite-n, "
                            "two-body, sample, lln, checks)");
  } else {
    config.command = *command;
  }
  for (const auto &key : keys()) {
    if (options[key.name]->count() > 0)
      key.set(config, flag_values[key.name], result.errors);
    else if (auto it = file_values.find(key.name); it != file_values.end())
      key.set(config, it->second, result.errors);
  }
  cross_validate(config, result.errors);
  if (result.errors.empty())
    result.config = config;
  return result;
}

ConfigParse parse_config(int argc, const char *const *argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i)
    args.emplace_back(argv[i]);
  return parse_config(args);
}

} // namespace hartree_lab
