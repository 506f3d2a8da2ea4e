#include "catch_amalgamated.hpp"

#include "hartree_lab/error.hpp"
#include "hartree_lab/radial_ops.hpp"
#include "hartree_lab/solver.hpp"

#include "support/radial_sampler.hpp"
#include "support/shooting.hpp"

#include <cmath>
#include <numbers>

using namespace hartree_lab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

const HartreeResult &reference(double lambda) {
  static std::map<double, HartreeResult> cache;
  auto it = cache.find(lambda);
  if (it == cache.end())
    it = cache.emplace(lambda, minimize_hartree(lambda, default_grid(lambda), {}))
             .first;
  return it->second;
}

double max_abs_difference(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

} // namespace

TEST_CASE("radial eigensolver", "[solver][eigen]") {
  SECTION("hydrogen levels converge at third order") {
    double last = 1.0;
    for (std::size_t n : {2000u, 4000u, 8000u}) {
      auto g = make_grid(GridScheme::uniform, n, 40.0);
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i)
        v[i] = -1.0 / g->node(i);
      auto gs = radial_ground_state(g, v, 1.0);
      const double err = std::abs(gs.eigenvalue + 0.5);
      CHECK(err < last / 6);
      last = err;
      for (double x : gs.orbital.values())
        CHECK(x >= 0.0);
    }
    CHECK(last < 1e-7);
  }
  SECTION("harmonic oscillator") {
    auto g = make_grid(GridScheme::uniform, 2000, 12.0);
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = 0.5 * g->node(i) * g->node(i);
    CHECK_THAT(radial_ground_state(g, v, 0.0).eigenvalue, WithinAbs(1.5, 1e-9));
  }
  SECTION("log grids are rejected") {
    auto g = make_grid(GridScheme::log_spaced, 100, 10.0);
    std::vector<double> v(100, 0.0);
    CHECK_THROWS_AS(radial_ground_state(g, v, 0.0), LabError);
  }
}

TEST_CASE("effective potential", "[solver]") {
  auto g = make_grid(GridScheme::uniform, 4000, 40.0);
  auto rho = hydrogenic_density(g, 1.0);
  auto v = effective_potential(rho, 1.0);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double r = g->node(i);
    if (r < 0.1 || r > 10)
      continue;
    CHECK(std::abs(v[i] + std::exp(-2 * r) * (1 + 1 / r)) < 1e-5);
  }
  auto v2 = effective_potential(rho, 2.0);
  for (std::size_t i = 0; i < g->size(); ++i)
    if (g->node(i) > 20)
      CHECK(std::abs(v2[i] + 1 / g->node(i)) < 1e-4);

  const auto &res = reference(1.0);
  auto tail = effective_potential(RadialDensity::of(res.orbital), 1.0);
  for (std::size_t i = 0; i < tail.size(); ++i)
    if (res.orbital.grid()->node(i) > 30)
      CHECK(std::abs(res.orbital.grid()->node(i) * tail[i]) < 1e-3);
}

TEST_CASE("hydrogenic limit without repulsion", "[solver]") {
  auto res = minimize_mean_field(MeanFieldModel::coulomb(1.0, 0.0),
                                 default_grid(1.0), {});
  REQUIRE(res.status == SolveStatus::converged);
  CHECK_THAT(res.energy, WithinAbs(-0.5, 1e-6));
  const auto rho = RadialDensity::of(res.orbital);
  CHECK_THAT(attraction_C(rho), WithinAbs(1.0, 1e-5));
  CHECK(l1_distance(rho, hydrogenic_density(res.orbital.grid(), 1.0)) < 1e-5);
}

TEST_CASE("hartree minimizer against the shooting oracle", "[solver][oracle]") {
  for (double lambda : {1.0, 2.0}) {
    const auto &res = reference(lambda);
    REQUIRE(res.status == SolveStatus::converged);
    oracle::ShootingSolver shooting(lambda, 1.0, 40.0 / lambda, 16000);
    const auto ref = shooting.solve();
    CHECK(std::abs(res.energy - ref.energy) < 1e-5);
    CHECK(std::abs(res.chemical_potential - ref.eigenvalue) < 1e-5);
  }
  const auto &one = reference(1.0);
  CHECK(one.energy < -0.1875);
  CHECK(one.energy >= -0.5);
  // The stored energy is the functional at the returned orbital.
  CHECK(hartree_energy(one.orbital, 1.0).total == one.energy);
}

TEST_CASE("hartree identities", "[solver]") {
  for (double lambda : {0.9, 1.0, 1.2, 1.5, 2.0}) {
    const auto &res = reference(lambda);
    REQUIRE(res.converged);
    REQUIRE(res.bound);
    CHECK(res.energy < 0.0);
    CHECK(res.virial_ratio() <= 1e-4);
    CHECK(res.fisher_ratio() <= 1e-3);
    for (std::size_t k = 1; k < res.energy_history.size(); ++k)
      CHECK(res.energy_history[k] <=
            res.energy_history[k - 1] + 1e-13 * std::abs(res.energy_history[k]));
  }
}

TEST_CASE("kinetic energy on a doubled grid", "[solver]") {
  const auto &res = reference(1.0);
  auto fine = minimize_hartree(1.0, make_grid(GridScheme::uniform, 8000, 40.0), {});
  // Independent re-evaluation: squared forward differences, midpoint rule.
  const auto u = fine.orbital.values();
  const double h = fine.orbital.grid()->spacing();
  double k = u[0] * u[0] / h;
  for (std::size_t i = 0; i + 1 < u.size(); ++i)
    k += (u[i + 1] - u[i]) * (u[i + 1] - u[i]) / h;
  CHECK_THAT(kinetic_K(res.orbital), WithinRel(k, 1e-5));
}

TEST_CASE("attraction of the minimizer against monte carlo", "[solver][mc]") {
  const auto &res = reference(1.0);
  const auto rho = RadialDensity::of(res.orbital);
  oracle::RadialSampler sampler(res.orbital.grid()->nodes(), rho.values());
  std::mt19937_64 rng(99);
  double s = 0.0, s2 = 0.0;
  const std::size_t m = 10'000'000;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = 1.0 / sampler(rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / m;
  const double se = std::sqrt((s2 / m - mean * mean) / m);
  CHECK(std::abs(mean - attraction_C(rho)) < 3 * se);
}

TEST_CASE("scf step", "[solver][scf]") {
  SECTION("fixed point") {
    SolverOptions tight;
    tight.residual_tolerance = 1e-13;
    auto res = minimize_hartree(1.0, default_grid(1.0), tight);
    REQUIRE(res.converged);
    auto step = scf_step(res.orbital, 1.0, tight);
    CHECK(step.residual < 1e-12);
    CHECK(max_abs_difference(step.orbital.values(), res.orbital.values()) < 1e-10);
    CHECK_FALSE(step.unbound_iterate);
  }
  SECTION("contraction from the hydrogenic start") {
    SolverOptions opts;
    opts.mixing = 0.5;
    auto model = MeanFieldModel::coulomb(1.0);
    auto state = scf_start(initial_orbital(default_grid(1.0), model, opts), model);
    double last = 1e9;
    for (int k = 0; k < 10; ++k) {
      auto step = scf_step(state, model, opts);
      CHECK(step.residual < last);
      last = step.residual;
      for (double x : step.orbital.values())
        CHECK(x >= 0.0);
      state = step.next;
    }
  }
  SECTION("uniqueness across initializations") {
    for (double lambda : {0.9, 1.0, 1.5}) {
      std::vector<RadialDensity> densities;
      for (auto [guess, seed] : {std::pair{InitialGuess::hydrogenic, 0ull},
                                 {InitialGuess::gaussian, 0ull},
                                 {InitialGuess::random_positive, 7ull}}) {
        SolverOptions opts;
        opts.initial_guess = guess;
        opts.seed = seed;
        auto res = minimize_hartree(lambda, default_grid(lambda), opts);
        REQUIRE(res.converged);
        densities.push_back(RadialDensity::of(res.orbital));
      }
      for (std::size_t a = 0; a < densities.size(); ++a)
        for (std::size_t b = a + 1; b < densities.size(); ++b)
          CHECK(l1_distance(densities[a], densities[b]) < 1e-6);
    }
  }
  SECTION("option validation") {
    SolverOptions bad;
    bad.mixing = 0.0;
    CHECK_THROWS_AS(minimize_hartree(1.0, default_grid(1.0), bad), LabError);
    bad = {};
    bad.residual_tolerance = 0.0;
    CHECK_THROWS_AS(minimize_hartree(1.0, default_grid(1.0), bad), LabError);
  }
}

TEST_CASE("variational consistency", "[solver]") {
  auto g = make_grid(GridScheme::uniform, 4000, 50.0);
  for (double lambda : {0.9, 1.0, 1.5}) {
    auto res = minimize_hartree(lambda, g, {});
    REQUIRE(res.converged);
    std::vector<Orbital> trials = {hydrogenic_orbital(g, lambda),
                                   hydrogenic_orbital(g, 0.8 * lambda),
                                   gaussian_orbital(g, 1 / (lambda * lambda))};
    for (double d : {-0.05, 0.05})
      trials.push_back(minimize_hartree(lambda + d, g, {}).orbital);
    for (const auto &t : trials)
      CHECK(res.energy <= hartree_energy(t, lambda).total);
  }
}

TEST_CASE("finite-N upper-bound chain", "[solver]") {
  const auto &res = reference(1.0);
  double prev_gap = 0.0;
  for (int n : {1, 2, 4, 8, 16}) {
    const double per = finite_n_hartree(res.orbital, 1.0, n).total() / (n * n * n);
    CHECK(per <= res.energy + 1e-10);
    const double gap = res.energy - per;
    if (n > 1) {
      const double ratio = prev_gap / gap;
      CHECK(ratio > 1.0);
      CHECK(ratio < 4.0);
    }
    prev_gap = gap;
  }
}

TEST_CASE("binding diagnostics", "[solver]") {
  auto res = minimize_hartree(0.5, default_grid(0.5), {});
  CHECK_FALSE(res.bound);
  CHECK(res.status == SolveStatus::not_bound);
}

TEST_CASE("epsilon sweep", "[solver][sweep]") {
  SECTION("monotone curve") {
    std::vector<double> lambdas{0.9, 1.0, 1.1, 1.2};
    auto curve = epsilon_sweep(lambdas, nullptr, {});
    REQUIRE(curve.points.size() == 4);
    CHECK(curve.all_negative);
    CHECK(curve.strictly_decreasing);
    CHECK(curve.concave);
    CHECK_FALSE(curve.has_gaps);
    for (std::size_t i = 0; i < lambdas.size(); ++i)
      CHECK(curve.points[i].lambda == lambdas[i]);
  }
  SECTION("single point") {
    std::vector<double> one{1.0};
    auto curve = epsilon_sweep(one, nullptr, {});
    CHECK(curve.points.size() == 1);
    CHECK(curve.strictly_decreasing);
    CHECK(curve.concave);
  }
  SECTION("normal form") {
    for (double lambda : {1.5, 2.0}) {
      const double e = reference(lambda).energy;
      auto tilde = minimize_mean_field(MeanFieldModel::coulomb(1.0, 1.0 / lambda),
                                       default_grid(1.0), {});
      REQUIRE(tilde.converged);
      CHECK_THAT(e, WithinRel(lambda * lambda * tilde.energy, 1e-4));
    }
  }
  SECTION("preconditions") {
    std::vector<double> unsorted{1.0, 0.9};
    CHECK_THROWS_AS(epsilon_sweep(unsorted, nullptr, {}), LabError);
    std::vector<double> low{0.5, 1.0};
    CHECK_THROWS_AS(epsilon_sweep(low, nullptr, {}), LabError);
    SweepOptions permissive;
    permissive.allow_subcritical = true;
    auto curve = epsilon_sweep(low, default_grid(1.0), {}, permissive);
    CHECK(curve.has_gaps);
    CHECK_FALSE(curve.points[0].bound);
  }
}

TEST_CASE("critical coupling bracket validation", "[solver][critical]") {
  try {
    critical_lambda(threshold_grid(), {}, {0.9, 1.0});
    FAIL("expected bad-bracket");
  } catch (const LabError &e) {
    CHECK(e.kind() == ErrorKind::bad_bracket);
  }
  CHECK_THROWS_AS(critical_lambda(default_grid(1.0), {}, {1.0, 0.9}), LabError);
}

TEST_CASE("harmonic trap", "[solver][trap]") {
  auto g = make_grid(GridScheme::uniform, 1500, 12.0);
  SECTION("oscillator ground state") {
    auto res = minimize_mean_field(MeanFieldModel::harmonic(0.5, {}), g, {});
    REQUIRE(res.converged);
    CHECK_THAT(res.energy, WithinAbs(oscillator_ground_energy(0.5), 1e-6));
    CHECK(l1_distance(RadialDensity::of(res.orbital), gaussian_density(g, 0.5)) < 1e-5);
  }
  SECTION("gaussian pair kernel raises the energy") {
    auto kernel = gaussian_pair_kernel(*g, 0.5);
    auto res = minimize_mean_field(MeanFieldModel::harmonic(0.5, kernel), g, {});
    REQUIRE(res.converged);
    CHECK(res.energy > 1.5);
    CHECK(res.breakdown.repulsion > 0.0);
    const auto direct = trap_energy(res.orbital, 0.5, kernel);
    CHECK_THAT(direct.total, WithinAbs(res.energy, 1e-12));
    // A Gaussian trial cannot do better than the minimizer.
    for (double s2 : {0.4, 0.5, 0.6, 0.8})
      CHECK(res.energy <= trap_energy(gaussian_orbital(g, s2), 0.5, kernel).total);
  }
}
