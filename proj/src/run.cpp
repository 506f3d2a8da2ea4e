#include "hartree_lab/run.hpp"

#include "hartree_lab/ensemble.hpp"
#include "hartree_lab/finite_n.hpp"
#include "hartree_lab/functionals.hpp"
#include "hartree_lab/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace hartree_lab {

namespace {

struct Context {
  const RunConfig &config;
  nlohmann::json config_echo;
  std::string timestamp;
  std::vector<ResultRecord> records;

  void emit(nlohmann::json payload, const std::string &grid_hash = {}) {
    ResultRecord r;
    r.command = to_string(config.command);
    r.kind = record_kind(config.command);
    r.config = config_echo;
    r.timestamp = timestamp;
    r.payload = std::move(payload);
    r.seed = config.seed;
    r.grid_hash = grid_hash;
    records.push_back(std::move(r));
  }
};

ExitCode status_code(SolveStatus status) {
  switch (status) {
  case SolveStatus::converged:
    return ExitCode::ok;
  case SolveStatus::not_bound:
    return ExitCode::not_bound;
  case SolveStatus::no_convergence:
    return ExitCode::no_convergence;
  }
  return ExitCode::internal;
}

// Null means the adaptive grid.
GridPtr solve_grid(const RunConfig &c, double lambda, bool critical) {
  if (c.grid.scheme == "threshold" || (c.grid.scheme == "auto" && critical))
    return threshold_grid();
  if (c.grid.scheme == "uniform")
    return make_grid(GridScheme::uniform, c.grid.nodes,
                     c.grid.r_max > 0.0 ? c.grid.r_max : 40.0 / lambda);
  return nullptr;
}

HartreeResult solve_coulomb(const RunConfig &c, double lambda) {
  const auto grid = solve_grid(c, lambda, false);
  if (!grid)
    return minimize_hartree_adaptive(lambda, c.solver, c.repulsion);
  return minimize_mean_field(MeanFieldModel::coulomb(lambda, c.repulsion), grid, c.solver);
}

HartreeResult bound_minimizer(const RunConfig &c, double lambda) {
  auto res = solve_coulomb(c, lambda);
  if (res.status == SolveStatus::not_bound)
    throw LabError(ErrorKind::not_bound,
                   "no bound Hartree minimizer at lambda " + std::to_string(lambda));
  if (res.status != SolveStatus::converged)
    throw LabError(ErrorKind::no_convergence,
                   "Hartree solve did not converge at lambda " + std::to_string(lambda));
  return res;
}

HartreeResult solve_trap(const RunConfig &c) {
  const auto grid = c.grid.scheme == "uniform"
                        ? make_grid(GridScheme::uniform, c.grid.nodes,
                                    c.grid.r_max > 0.0 ? c.grid.r_max : 12.0)
                        : make_grid(GridScheme::uniform, 1500,
                                    12.0 * std::pow(0.5 / c.trap, 0.25));
  std::vector<double> kernel;
  if (c.pair_strength != 0.0) {
    kernel = gaussian_pair_kernel(*grid, c.pair_width);
    for (auto &u : kernel)
      u *= c.pair_strength;
  }
  return minimize_mean_field(MeanFieldModel::harmonic(c.trap, std::move(kernel)), grid, c.solver);
}

ExitCode run_solve(Context &ctx) {
  const auto &c = ctx.config;
  const auto res = c.trap > 0.0 ? solve_trap(c) : solve_coulomb(c, c.lambda);
  auto payload = to_json(res);
  payload["repulsion"] = c.repulsion;
  payload["trap"] = c.trap;
  ctx.emit(std::move(payload), hex_hash(res.orbital.grid()->hash()));
  return status_code(res.status);
}

ExitCode run_sweep(Context &ctx) {
  const auto &c = ctx.config;
  auto lambdas = c.lambda_list;
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  const auto grid = solve_grid(c, lambdas.front(), false);
  const auto curve = epsilon_sweep(lambdas, grid, c.solver, {.allow_subcritical = true});
  ExitCode code = ExitCode::ok;
  for (const auto &p : curve.points) {
    ctx.emit(to_json(p), hex_hash(p.grid_hash));
    if (p.status == SolveStatus::no_convergence)
      code = ExitCode::no_convergence;
  }
  return code;
}

ExitCode run_critical(Context &ctx) {
  const auto &c = ctx.config;
  const auto grid = solve_grid(c, c.bracket_lo, true);
  const auto est = critical_lambda(grid ? grid : threshold_grid(), c.solver,
                                   {c.bracket_lo, c.bracket_hi}, c.width);
  ctx.emit(to_json(est), hex_hash((grid ? grid : threshold_grid())->hash()));
  return ExitCode::ok;
}

TwoBodyBasis config_basis(const RunConfig &c) {
  return TwoBodyBasis::geometric(parse_two_body_family(c.family), c.exponents, c.exponent_lo,
                                 c.exponent_hi, c.lambda);
}

ExitCode run_finite_n(Context &ctx) {
  const auto &c = ctx.config;
  std::vector<int> ns;
  for (auto n : c.effective_n_list())
    ns.push_back(static_cast<int>(n));
  const auto ledger = monotonicity_ledger(c.lambda, ns, config_basis(c), c.solver);
  for (const auto &row : ledger.rows) {
    auto payload = to_json(row);
    payload["lambda"] = c.lambda;
    ctx.emit(std::move(payload));
  }
  return ledger.ok() ? ExitCode::ok : ExitCode::check_failed;
}

ExitCode run_two_body(Context &ctx) {
  const auto &c = ctx.config;
  const TwoBodyParams params{c.lambda, c.kappa};
  const auto basis = config_basis(c);
  const auto min = minimize_two_body(basis, params);
  const auto parts = two_body_energy(min.trial, params);
  ctx.emit({{"lambda", c.lambda},
            {"kappa", c.kappa},
            {"energy", min.energy},
            {"kinetic", parts.kinetic},
            {"attraction", parts.attraction},
            {"repulsion", parts.repulsion},
            {"family", c.family},
            {"basis_size", basis.size()},
            {"smallest_overlap_eigenvalue", min.smallest_overlap_eigenvalue}});
  return ExitCode::ok;
}

ExitCode run_sample(Context &ctx) {
  const auto &c = ctx.config;
  const auto res = bound_minimizer(c, c.lambda);
  const auto density = RadialDensity::of(res.orbital);
  const auto cloud = sample_density(density, c.samples, c.seed, "hartree");
  double mean_r = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    mean_r += std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  }
  if (!cloud.empty())
    mean_r /= static_cast<double>(cloud.size());
  ctx.emit({{"lambda", c.lambda},
            {"n", cloud.size()},
            {"mean_radius", mean_r},
            {"points", cloud.coords}},
           hex_hash(density.grid()->hash()));
  return ExitCode::ok;
}

ExitCode run_lln(Context &ctx) {
  const auto &c = ctx.config;
  const auto report = lln_experiment(c.lambda, c.effective_n_list(), c.order, c.epsilon,
                                     c.repetitions, c.seed, c.solver,
                                     {.directions = c.directions});
  for (const auto &row : report.rows) {
    auto payload = to_json(row);
    payload["lambda"] = c.lambda;
    payload["order"] = c.order;
    ctx.emit(std::move(payload));
  }
  return ExitCode::ok;
}

// --- invariant battery ------------------------------------------------------

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  nlohmann::json detail = nlohmann::json::object();
  bool passed() const { return std::isfinite(value) && value <= tolerance; }
};

const std::vector<double> &identity_lambdas() {
  static const std::vector<double> l{0.9, 1.0, 1.2, 1.5, 2.0};
  return l;
}

Check virial_and_fisher(const std::vector<HartreeResult> &sols, bool fisher) {
  Check ch{fisher ? "fisher" : "virial", 0.0, fisher ? 1e-3 : 1e-4};
  for (const auto &s : sols) {
    const double r = (s.status == SolveStatus::converged)
                         ? (fisher ? s.fisher_ratio() : s.virial_ratio())
                         : std::numeric_limits<double>::infinity();
    ch.value = std::max(ch.value, r);
    ch.detail[std::to_string(s.lambda)] = std::isfinite(r) ? nlohmann::json(r) : nlohmann::json("not converged");
  }
  return ch;
}

Check de_bruijn(const HartreeResult &at_one) {
  Check ch{"de-bruijn", 0.0, 1e-2};
  const auto grid = make_grid(GridScheme::uniform, 4000, 40.0);
  const std::vector<std::pair<std::string, RadialDensity>> densities{
      {"gaussian", gaussian_density(grid, 1.0)}, {"hartree", RadialDensity::of(at_one.orbital)}};
  for (const auto &[name, rho] : densities)
    for (double t : {0.05, 0.1, 0.2}) {
      const auto r = de_bruijn_check(rho, t);
      ch.value = std::max(ch.value, r.relative_error);
      ch.detail[name + "@" + std::to_string(t)] = r.relative_error;
    }
  return ch;
}

Check superadditivity(std::uint64_t seed) {
  Check ch{"superadditivity", 0.0, 0.0};
  int failures = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::uint32_t trial = 0; trial < 20; ++trial) {
    Philox4x32 rng(seed, 0x5a9e, trial);
    const int d = 6, split = 3;
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        a(i, j) = rng.normal();
    const Eigen::MatrixXd cov = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
    const auto full = fisher_superadditivity(GaussianSpec(cov), split);
    Eigen::MatrixXd block = cov;
    block.topRightCorner(split, d - split).setZero();
    block.bottomLeftCorner(d - split, split).setZero();
    const auto diag = fisher_superadditivity(GaussianSpec(block), split);
    const bool positive = full.joint > 0.0 && full.first > 0.0 && full.second > 0.0;
    const bool ok = positive && full.superadditive && full.monotone && !full.equality &&
                    diag.superadditive && diag.monotone && diag.equality;
    if (!ok)
      ++failures;
    min_gap = std::min(min_gap, full.gap / full.joint);
  }
  ch.value = failures;
  ch.detail = {{"trials", 20}, {"failures", failures}, {"min_relative_gap", min_gap}};
  return ch;
}

Check normal_form(const RunConfig &c, const HartreeResult &at_one) {
  Check ch{"normal-form", 0.0, 1e-4};
  for (double lambda : {1.0, 1.5, 2.0}) {
    const auto direct = lambda == 1.0 ? at_one : bound_minimizer(c, lambda);
    const auto reduced = minimize_hartree_adaptive(1.0, c.solver, 1.0 / lambda);
    const double rel =
        std::abs(direct.energy - lambda * lambda * reduced.energy) / std::abs(direct.energy);
    ch.value = std::max(ch.value, rel);
    ch.detail[std::to_string(lambda)] = rel;
  }
  return ch;
}

Check decomposition(const HartreeResult &at_one) {
  Check ch{"decomposition", 0.0, 1e-10};
  for (int n : {2, 3, 10}) {
    const double r = conditional_decomposition_check(at_one.orbital, 1.0, n);
    ch.value = std::max(ch.value, r);
    ch.detail[std::to_string(n)] = r;
  }
  return ch;
}

ExitCode run_checks(Context &ctx) {
  const auto &c = ctx.config;
  std::vector<HartreeResult> sols;
  for (double lambda : identity_lambdas())
    sols.push_back(solve_coulomb(c, lambda));
  const auto &at_one = sols[1];
  if (at_one.status != SolveStatus::converged)
    throw LabError(ErrorKind::no_convergence, "Hartree solve at lambda 1 did not converge");

  std::vector<Check> checks{virial_and_fisher(sols, false), virial_and_fisher(sols, true),
                            de_bruijn(at_one), superadditivity(c.seed),
                            normal_form(c, at_one), decomposition(at_one)};
  std::sort(checks.begin(), checks.end(),
            [](const Check &a, const Check &b) { return a.name < b.name; });
  ExitCode code = ExitCode::ok;
  for (const auto &ch : checks) {
    ctx.emit({{"name", ch.name},
              {"passed", ch.passed()},
              {"value", ch.value},
              {"tolerance", ch.tolerance},
              {"detail", ch.detail}});
    if (!ch.passed())
      code = ExitCode::check_failed;
  }
  return code;
}

} // namespace

std::string_view to_string(ExitCode code) {
  switch (code) {
  case ExitCode::ok:
    return "ok";
  case ExitCode::internal:
    return "internal-error";
  case ExitCode::validation_error:
    return "validation-error";
  case ExitCode::not_bound:
    return "not-bound";
  case ExitCode::no_convergence:
    return "no-convergence";
  case ExitCode::check_failed:
    return "check-failed";
  case ExitCode::io_error:
    return "io-error";
  }
  return "internal-error";
}

ExitCode exit_code_for(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::invalid_argument:
  case ErrorKind::bad_bracket:
  case ErrorKind::order_exceeds_sample:
  case ErrorKind::basis_degenerate:
  case ErrorKind::validation:
    return ExitCode::validation_error;
  case ErrorKind::not_bound:
    return ExitCode::not_bound;
  case ErrorKind::no_convergence:
  case ErrorKind::eigensolver_failure:
    return ExitCode::no_convergence;
  case ErrorKind::io:
    return ExitCode::io_error;
  default:
    return ExitCode::internal;
  }
}

std::string record_kind(Command command) {
  switch (command) {
  case Command::solve:
    return "hartree";
  case Command::sweep:
    return "curve-point";
  case Command::critical:
    return "critical";
  case Command::finite_n:
    return "ledger-row";
  case Command::two_body:
    return "two-body";
  case Command::sample:
    return "sample";
  case Command::lln:
    return "lln-row";
  case Command::checks:
    return "check";
  }
  return "hartree";
}

RunOutcome run(const RunConfig &config) {
  Context ctx{config, to_json(config), utc_timestamp(), {}};
  RunOutcome out;
  try {
    switch (config.command) {
    case Command::solve:
      out.code = run_solve(ctx);
      break;
    case Command::sweep:
      out.code = run_sweep(ctx);
      break;
    case Command::critical:
      out.code = run_critical(ctx);
      break;
    case Command::finite_n:
      out.code = run_finite_n(ctx);
      break;
    case Command::two_body:
      out.code = run_two_body(ctx);
      break;
    case Command::sample:
      out.code = run_sample(ctx);
      break;
    case Command::lln:
      out.code = run_lln(ctx);
      break;
    case Command::checks:
      out.code = run_checks(ctx);
      break;
    }
    if (out.code != ExitCode::ok)
      out.message = std::string(to_string(out.code));
  } catch (const LabError &e) {
    out.code = exit_code_for(e.kind());
    out.message = e.what();
  } catch (const std::exception &e) {
    out.code = ExitCode::internal;
    out.message = std::string("internal-error: ") + e.what();
  }
  out.records = std::move(ctx.records);
  return out;
}

std::string render(const std::vector<ResultRecord> &records, const RunConfig &config) {
  if (config.format == OutputFormat::csv)
    return emit_plotdata(records, record_kind(config.command), ',');
  return serialize_lines(records);
}

RunOutcome run_and_write(const RunConfig &config) {
  auto out = run(config);
  if (out.records.empty() && out.code != ExitCode::ok)
    return out;
  try {
    const auto text = render(out.records, config);
    if (config.output == "-") {
      std::cout << text << std::flush;
      if (!std::cout)
        throw LabError(ErrorKind::io, "cannot write to standard output");
    } else {
      write_atomic(config.output, text);
    }
  } catch (const LabError &e) {
    out.code = exit_code_for(e.kind());
    out.message = e.what();
  }
  return out;
}

int cli_main(int argc, const char *const *argv) {
  const auto parsed = parse_config(argc, argv);
  if (parsed.help) {
    std::cout << parsed.help_text;
    return 0;
  }
  if (!parsed.config) {
    for (const auto &e : parsed.errors)
      std::cerr << "validation-error: " << e << '\n';
    return static_cast<int>(ExitCode::validation_error);
  }
  const auto out = run_and_write(*parsed.config);
  if (!out.message.empty())
    std::cerr << out.message << '\n';
  return static_cast<int>(out.code);
}

} // namespace hartree_lab
