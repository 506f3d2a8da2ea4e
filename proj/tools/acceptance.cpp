// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "hartree_lab/ensemble.hpp"
#include "hartree_lab/finite_n.hpp"
#include "hartree_lab/functionals.hpp"
#include "hartree_lab/run.hpp"
#include "hartree_lab/solver.hpp"

#include "support/two_body_oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hartree_lab;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const char *name, double budget_s, const std::function<Verdict()> &body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception &e) {
    v = {false, std::string("threw ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0.0 && secs > budget_s) {
    v.pass = false;
    v.detail += fmt("; over the %.0f s budget", budget_s);
  }
  if (!v.pass)
    ++failures;
  std::printf("%s %2d %-28s %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(),
              secs);
  std::fflush(stdout);
}

const std::vector<double> identity_lambdas{0.9, 1.0, 1.2, 1.5, 2.0};

std::vector<HartreeResult> &identity_solutions() {
  static std::vector<HartreeResult> sols = [] {
    std::vector<HartreeResult> s;
    for (double l : identity_lambdas)
      s.push_back(minimize_hartree_adaptive(l, {}));
    return s;
  }();
  return sols;
}

const HartreeResult &at_one() { return identity_solutions()[1]; }

Verdict hydrogenic() {
  const auto grid = default_grid(1.0);
  const auto res = minimize_mean_field(MeanFieldModel::coulomb(1.0, 0.0), grid, {});
  const double inv_r = attraction_C(RadialDensity::of(res.orbital));
  const double de = std::abs(res.energy + 0.5), dc = std::abs(inv_r - 1.0);
  return {res.converged && de <= 1e-6 && dc <= 1e-5,
          fmt("eps=%.10f |err|=%.1e, <1/r>=%.8f |err|=%.1e", res.energy, de, inv_r, dc)};
}

Verdict identity(bool fisher) {
  double worst = 0.0;
  bool all = true;
  for (const auto &s : identity_solutions()) {
    all = all && s.status == SolveStatus::converged;
    worst = std::max(worst, fisher ? s.fisher_ratio() : s.virial_ratio());
  }
  const double tol = fisher ? 1e-3 : 1e-4;
  return {all && worst <= tol,
          fmt("max ratio %.2e <= %.0e over 5 couplings%s", worst, tol,
              all ? "" : ", some not converged")};
}

Verdict threshold() {
  const auto est = critical_lambda(threshold_grid(), {}, {0.5, 1.0});
  return {est.estimate >= 0.80 && est.estimate <= 0.85,
          fmt("lambda_*=%.5f +- %.1e in [0.80, 0.85] (1/1.21=%.5f), %d solves", est.estimate,
              est.half_width, 1.0 / 1.21, est.solves)};
}

Verdict curve_shape() {
  std::vector<double> lambdas;
  for (int i = 0; i <= 23; ++i)
    lambdas.push_back(0.85 + 0.05 * i);
  const auto curve = epsilon_sweep(lambdas, nullptr, {});
  bool strictly = true;
  for (std::size_t i = 1; i < curve.points.size(); ++i)
    strictly = strictly && curve.points[i].energy < curve.points[i - 1].energy;
  const bool ok = curve.all_negative && strictly && curve.strictly_decreasing &&
                  curve.max_second_difference <= 1e-6 && !curve.has_gaps;
  return {ok, fmt("%zu points, all<0 %s, decreasing %s, max 2nd divided diff %.3e <= 1e-6",
                  curve.points.size(), curve.all_negative ? "yes" : "no",
                  strictly ? "yes" : "no", curve.max_second_difference)};
}

Verdict normal_form() {
  double worst = 0.0;
  for (double l : {1.0, 1.5, 2.0}) {
    const auto direct = minimize_hartree_adaptive(l, {});
    const auto reduced = minimize_hartree_adaptive(1.0, {}, 1.0 / l);
    worst = std::max(worst, std::abs(direct.energy - l * l * reduced.energy) /
                                std::abs(direct.energy));
  }
  return {worst <= 1e-4, fmt("max relative mismatch %.2e <= 1e-4", worst)};
}

Verdict ledger() {
  const auto led = monotonicity_ledger(1.0, {1, 2, 4, 8, 16}, default_two_body_basis(1.0));
  const double eps = led.rows.back().value;
  double n1 = 0.0;
  std::vector<std::pair<int, double>> gaps;
  for (const auto &r : led.rows) {
    if (r.n == 1)
      n1 = r.value;
    if (r.n && *r.n >= 4)
      gaps.emplace_back(*r.n, eps - r.value);
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool positive = true;
  for (const auto &[n, g] : gaps) {
    positive = positive && g > 0.0;
    lo = std::min(lo, std::abs(g) * n);
    hi = std::max(hi, std::abs(g) * n);
  }
  const bool ok = led.ok() && n1 == -0.5 && n1 <= eps && eps < -0.1875 && positive &&
                  gaps.size() == 3 && hi <= 2.0 * lo;
  return {ok, fmt("n1=%.3f <= eps=%.6f < -0.1875, N*gap in [%.4f, %.4f] (ratio %.3f <= 2), "
                  "%zu violations",
                  n1, eps, lo, hi, hi / lo, led.violations.size())};
}

Verdict two_body() {
  const TwoBodyParams params{1.0, 0.5};
  const auto basis = default_two_body_basis(1.0);
  const double e6 = minimize_two_body(basis, params).energy;
  std::vector<double> dense;
  for (int i = 0; i < 12; ++i)
    dense.push_back(0.3 * std::pow(8.0 / 0.3, i / 11.0));
  const double e12 = oracle::two_body_reference(dense, 1.0, 0.5);
  double last = std::numeric_limits<double>::infinity(), rise = 0.0;
  for (std::size_t k = 1; k <= basis.exponents().size(); ++k) {
    const double e = minimize_two_body(basis.truncated(k), params).energy;
    rise = std::max(rise, e - last);
    last = e;
  }
  const double diff = std::abs(e6 - e12);
  return {diff <= 1e-3 && rise <= 1e-12,
          fmt("6-exp %.8f vs 12-exp oracle %.8f (|d|=%.1e <= 1e-3), max rise %.1e <= 1e-12", e6,
              e12, diff, std::max(rise, 0.0))};
}

Verdict decomposition() {
  double worst = 0.0;
  for (int n : {2, 3, 10})
    worst = std::max(worst, conditional_decomposition_check(at_one().orbital, 1.0, n));
  return {worst <= 1e-10, fmt("max residual %.2e <= 1e-10 at N=2,3,10", worst)};
}

Verdict de_bruijn() {
  const auto grid = make_grid(GridScheme::uniform, 4000, 40.0);
  double worst = 0.0;
  for (const auto &rho : {gaussian_density(grid, 1.0), RadialDensity::of(at_one().orbital)})
    for (double t : {0.05, 0.1, 0.2})
      worst = std::max(worst, de_bruijn_check(rho, t).relative_error);
  return {worst <= 1e-2, fmt("max relative error %.2e <= 1e-2 (Gaussian and Hartree)", worst)};
}

Verdict fisher_suite() {
  int bad = 0;
  std::mt19937_64 rng(20261014);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const int particles = 2 + trial % 3;
    const int d = 3 * particles, split = 3 * (1 + trial % (particles - 1));
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        a(i, j) = normal(rng);
    const Eigen::MatrixXd cov = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd block = cov;
    block.topRightCorner(split, d - split).setZero();
    block.bottomLeftCorner(d - split, split).setZero();
    const auto full = fisher_superadditivity(GaussianSpec(cov), split);
    const auto diag = fisher_superadditivity(GaussianSpec(block), split);
    const bool positive = full.joint > 0 && full.first > 0 && full.second > 0;
    if (!(positive && full.monotone && full.superadditive && !full.equality &&
          diag.monotone && diag.superadditive && diag.equality))
      ++bad;
  }
  return {bad == 0, fmt("%d of 20 covariance trials failed", bad)};
}

Verdict lln() {
  const double lambda = 1.0;
  const auto main = lln_experiment(lambda, {256, 1024, 4096}, 1, 0.1, 50, 0);
  const auto &r = main.rows;
  const bool nonincreasing = r[0].exceedance >= r[1].exceedance &&
                             r[1].exceedance >= r[2].exceedance;
  const bool zero = r[2].exceedance == 0.0;
  const auto rho = RadialDensity::of(minimize_hartree_adaptive(lambda, {}).orbital);
  int wins = 0;
  const int seeds = 20;
  for (int s = 1; s <= seeds; ++s) {
    const auto rep = lln_experiment(rho, {256, 4096}, 1, 0.1, 50, static_cast<std::uint64_t>(s));
    wins += rep.rows[1].median < rep.rows[0].median;
  }
  const bool trend = wins >= 0.95 * seeds;
  return {nonincreasing && zero && trend,
          fmt("exceedance %.2f, %.2f, %.2f; medians %.4f, %.4f, %.4f; trend in %d/%d seeds",
              r[0].exceedance, r[1].exceedance, r[2].exceedance, r[0].median, r[1].median,
              r[2].median, wins, seeds)};
}

std::string stripped(const std::filesystem::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  auto records = parse_lines(ss.str());
  for (auto &rec : records)
    rec.timestamp.clear();
  return serialize_lines(records);
}

Verdict determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "hartree-lab-acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::vector<std::string>> commands{
      {"solve", "--lambda", "1.1", "--initial-guess", "random-positive", "--seed", "5"},
      {"sweep", "--lambda-list", "0.9,1.0,1.1"},
      {"two-body", "--kappa", "0.3"},
      {"finite-n", "--n-list", "1,2,4"},
      {"sample", "--samples", "500", "--seed", "17"},
      {"lln", "--n-list", "64,256", "--repetitions", "8", "--order", "2", "--seed", "23"},
      {"checks", "--seed", "3"}};
  int same = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::string texts[2];
    for (int pass = 0; pass < 2; ++pass) {
      const auto parsed = parse_config(commands[i]);
      if (!parsed.config)
        return {false, "config rejected: " + commands[i][0]};
      auto config = *parsed.config;
      config.output = (dir / (std::to_string(i) + ".jsonl")).string();
      const auto out = run_and_write(config);
      if (out.code != ExitCode::ok)
        return {false, commands[i][0] + " exited " + std::string(to_string(out.code))};
      texts[pass] = stripped(config.output);
    }
    same += !texts[0].empty() && texts[0] == texts[1];
  }
  std::filesystem::remove_all(dir);
  return {same == static_cast<int>(commands.size()),
          fmt("%d/%zu seeded commands byte-identical modulo timestamp", same, commands.size())};
}

} // namespace

int main() {
  criterion(1, "hydrogenic exactness", 5, hydrogenic);
  criterion(2, "virial identity", 60, [] { return identity(false); });
  criterion(3, "Fisher identity", 60, [] { return identity(true); });
  criterion(4, "binding threshold", 300, threshold);
  criterion(5, "curve shape", 0, curve_shape);
  criterion(6, "normal-form scaling", 0, normal_form);
  criterion(7, "monotonicity ledger", 0, ledger);
  criterion(8, "two-body oracle", 0, two_body);
  criterion(9, "conditional decomposition", 0, decomposition);
  criterion(10, "de Bruijn identity", 0, de_bruijn);
  criterion(11, "Gaussian Fisher suite", 0, fisher_suite);
  criterion(12, "LLN experiment", 600, lln);
  criterion(13, "determinism", 0, determinism);
  std::printf("%d of 13 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
