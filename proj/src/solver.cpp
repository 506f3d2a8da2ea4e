#include "hartree_lab/solver.hpp"

#include "hartree_lab/error.hpp"
#include "hartree_lab/parallel.hpp"
#include "hartree_lab/radial_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace hartree_lab {

namespace {

// Relative slack below which an energy change counts as no increase.
constexpr double energy_slack = 1e-13;

// Consecutive iterates without a negative eigenvalue before giving up.
constexpr int unbound_patience = 25;

// SCF iterations without halving the residual before switching to the flow;
// catches cycles whose energy increases are never consecutive.
constexpr int stagnation_limit = 12;

double unit_uniform(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

RadialDensity mix(const RadialDensity &a, const RadialDensity &b, double alpha) {
  const auto va = a.values();
  const auto vb = b.values();
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (1.0 - alpha) * va[i] + alpha * vb[i];
  return RadialDensity::normalized(a.grid(), std::move(out));
}

bool bound_state(const MeanFieldModel &model, double mu, double outer) {
  if (outer >= unbound_mass)
    return false;
  return model.trapped() || mu < -unbound_mu;
}

} // namespace

std::string_view to_string(InitialGuess guess) {
  switch (guess) {
  case InitialGuess::hydrogenic:
    return "hydrogenic";
  case InitialGuess::gaussian:
    return "gaussian";
  case InitialGuess::random_positive:
    return "random-positive";
  }
  return "?";
}

InitialGuess parse_initial_guess(std::string_view text) {
  if (text == "hydrogenic")
    return InitialGuess::hydrogenic;
  if (text == "gaussian")
    return InitialGuess::gaussian;
  if (text == "random-positive" || text == "random_positive")
    return InitialGuess::random_positive;
  throw LabError(ErrorKind::invalid_argument,
                 "unknown initial guess '" + std::string(text) + "'");
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
  case SolveStatus::converged:
    return "converged";
  case SolveStatus::not_bound:
    return "not-bound";
  case SolveStatus::no_convergence:
    return "no-convergence";
  }
  return "?";
}

void SolverOptions::validate() const {
  if (!(mixing > 0.0 && mixing <= 1.0))
    throw LabError(ErrorKind::invalid_argument, "mixing must be in (0, 1]");
  if (max_iterations < 1)
    throw LabError(ErrorKind::invalid_argument, "max_iterations must be >= 1");
  if (!(residual_tolerance > 0.0))
    throw LabError(ErrorKind::invalid_argument,
                   "residual_tolerance must be > 0");
}

MeanFieldModel MeanFieldModel::coulomb(double lambda, double repulsion) {
  if (!(lambda > 0.0))
    throw LabError(ErrorKind::invalid_argument, "lambda must be > 0");
  if (!(repulsion >= 0.0))
    throw LabError(ErrorKind::invalid_argument, "repulsion must be >= 0");
  return {lambda, repulsion, 0.0, {}};
}

MeanFieldModel MeanFieldModel::harmonic(double trap, std::vector<double> kernel) {
  if (!(trap > 0.0))
    throw LabError(ErrorKind::invalid_argument, "trap strength must be > 0");
  return {0.0, 0.0, trap, std::move(kernel)};
}

std::vector<double> effective_potential(const RadialDensity &density,
                                        const MeanFieldModel &model) {
  const auto &grid = *density.grid();
  const auto r = grid.nodes();
  std::vector<double> v(r.size(), 0.0);
  if (model.repulsion != 0.0) {
    const auto vh = radial_poisson(density);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = model.repulsion * vh[i];
  }
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] += -model.attraction / r[i] + model.trap * r[i] * r[i];
  if (!model.pair_kernel.empty()) {
    const auto w = pair_kernel_potential(density, model.pair_kernel);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] += w[i];
  }
  return v;
}

std::vector<double> effective_potential(const RadialDensity &density,
                                        double lambda) {
  return effective_potential(density, MeanFieldModel::coulomb(lambda));
}

EnergyBreakdown model_energy(const Orbital &orbital,
                             const MeanFieldModel &model) {
  const auto rho = RadialDensity::of(orbital);
  const double kinetic = 0.5 * kinetic_K(orbital);
  double attraction = 0.0;
  if (model.attraction != 0.0)
    attraction -= model.attraction * attraction_C(rho);
  if (model.trap != 0.0)
    attraction += model.trap * second_moment(rho);
  double repulsion = 0.0;
  if (model.repulsion != 0.0)
    repulsion += 0.5 * model.repulsion * repulsion_I(rho, rho);
  if (!model.pair_kernel.empty())
    repulsion += 0.5 * pair_kernel_energy(rho, model.pair_kernel);
  return EnergyBreakdown::of(kinetic, attraction, repulsion);
}

ScfState scf_start(const Orbital &orbital, const MeanFieldModel &model) {
  auto input = RadialDensity::of(orbital);
  const auto v = effective_potential(input, model);
  auto ground = radial_ground_state(orbital.grid(), v, model.attraction);
  return {std::move(input), std::move(ground)};
}

ScfStep scf_step(const ScfState &state, const MeanFieldModel &model,
                 const SolverOptions &options) {
  const auto fresh = RadialDensity::of(state.ground.orbital);
  const double residual = l2_distance(fresh, state.input);
  auto mixed = mix(state.input, fresh, options.mixing);
  const auto v = effective_potential(mixed, model);
  auto ground = radial_ground_state(mixed.grid(), v, model.attraction,
                                    state.ground);
  const double eigenvalue = ground.eigenvalue;
  Orbital orbital = ground.orbital;
  return {std::move(orbital), residual, eigenvalue,
          !model.trapped() && eigenvalue >= 0.0,
          ScfState{std::move(mixed), std::move(ground)}};
}

ScfStep scf_step(const Orbital &orbital, double lambda,
                 const SolverOptions &options) {
  options.validate();
  const auto model = MeanFieldModel::coulomb(lambda);
  return scf_step(scf_start(orbital, model), model, options);
}

double HartreeResult::virial_ratio() const {
  return std::abs(2.0 * breakdown.kinetic + breakdown.potential()) /
         std::abs(energy);
}

double HartreeResult::fisher_ratio() const {
  const double f = fisher_information(RadialDensity::of(orbital));
  return std::abs(f + 8.0 * energy) / std::abs(8.0 * energy);
}

Orbital initial_orbital(const GridPtr &grid, const MeanFieldModel &model,
                        const SolverOptions &options) {
  // Length scale of the guess: 1/λ for Coulomb, the oscillator length for
  // the trap.
  const double scale = model.trapped()
                           ? std::pow(2.0 * std::max(model.trap, 1e-3), -0.25)
                           : 1.0 / model.attraction;
  switch (options.initial_guess) {
  case InitialGuess::hydrogenic:
    return hydrogenic_orbital(grid, 1.0 / scale);
  case InitialGuess::gaussian:
    return gaussian_orbital(grid, scale * scale);
  case InitialGuess::random_positive: {
    std::mt19937_64 rng(options.seed);
    std::array<double, 4> c{}, a{};
    for (std::size_t k = 0; k < c.size(); ++k) {
      c[k] = 0.1 + 0.9 * unit_uniform(rng);
      a[k] = (0.3 + 1.7 * unit_uniform(rng)) / scale;
    }
    std::vector<double> u(grid->size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double r = grid->node(i);
      double s = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k)
        s += c[k] * r * std::exp(-a[k] * r);
      u[i] = s;
    }
    u.back() = 0.0;
    return Orbital::normalized(grid, std::move(u));
  }
  }
  throw LabError(ErrorKind::invalid_argument, "unknown initial guess");
}

HartreeResult minimize_mean_field(const MeanFieldModel &model,
                                  const GridPtr &grid,
                                  const SolverOptions &options,
                                  const std::optional<Orbital> &start) {
  options.validate();
  Orbital orbital = start ? *start : initial_orbital(grid, model, options);
  require_same_grid(*orbital.grid(), *grid);

  std::vector<double> history;
  double last_energy = model_energy(orbital, model).total;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool flow = false;
  std::optional<GroundState> ground;

  int unbound_run = 0;
  {
    ScfState state = scf_start(orbital, model);
    int increases = 0;
    int since_best = 0;
    double best_residual = std::numeric_limits<double>::infinity();
    while (iterations < options.max_iterations) {
      auto step = scf_step(state, model, options);
      ++iterations;
      const double e = model_energy(step.orbital, model).total;
      const bool increased =
          e > last_energy + energy_slack * std::max(1.0, std::abs(e));
      increases = increased ? increases + 1 : 0;
      if (!increased)
        history.push_back(e);
      last_energy = e;
      orbital = step.orbital;
      residual = step.residual;
      ground = state.ground;
      state = std::move(step.next);
      if (residual < options.residual_tolerance) {
        converged = true;
        break;
      }
      unbound_run = step.unbound_iterate ? unbound_run + 1 : 0;
      if (unbound_run >= unbound_patience)
        break;
      if (residual < 0.5 * best_residual) {
        best_residual = residual;
        since_best = 0;
      } else {
        ++since_best;
      }
      if (increases >= 2 || since_best >= stagnation_limit) {
        flow = true;
        break;
      }
    }
  }

  if (flow) {
    // Normalized imaginary-time flow with an energy-controlled step.
    double tau = 0.5;
    unbound_run = 0;
    double energy = model_energy(orbital, model).total;
    history.push_back(energy);
    while (iterations < options.max_iterations && tau > 1e-10) {
      const auto v = effective_potential(RadialDensity::of(orbital), model);
      auto trial = imaginary_time_step(orbital, v, model.attraction, tau);
      const double e = model_energy(trial, model).total;
      ++iterations;
      if (e > energy + energy_slack * std::max(1.0, std::abs(e))) {
        tau *= 0.5;
        continue;
      }
      orbital = std::move(trial);
      energy = e;
      history.push_back(e);
      tau = std::min(2.0 * tau, 50.0);
      const auto rho = RadialDensity::of(orbital);
      auto gs = radial_ground_state(grid, effective_potential(rho, model),
                                    model.attraction, ground);
      residual = l2_distance(RadialDensity::of(gs.orbital), rho);
      unbound_run = !model.trapped() && gs.eigenvalue >= 0.0 ? unbound_run + 1 : 0;
      ground = std::move(gs);
      if (residual < options.residual_tolerance) {
        converged = true;
        break;
      }
      if (unbound_run >= unbound_patience)
        break;
    }
  }

  const auto rho = RadialDensity::of(orbital);
  const auto final_ground = radial_ground_state(
      grid, effective_potential(rho, model), model.attraction, ground);
  const auto parts = model_energy(orbital, model);
  const double outer = outer_mass(rho);
  const bool bound = bound_state(model, final_ground.eigenvalue, outer);

  HartreeResult result{.lambda = model.trapped() ? model.trap : model.attraction,
                       .energy = parts.total,
                       .chemical_potential = final_ground.eigenvalue,
                       .breakdown = parts,
                       .orbital = std::move(orbital),
                       .iterations = iterations,
                       .residual = residual,
                       .converged = converged,
                       .bound = bound,
                       .boundary_mass = outer,
                       .used_gradient_flow = flow,
                       .status = SolveStatus::converged,
                       .energy_history = std::move(history)};
  if (!bound)
    result.status = SolveStatus::not_bound;
  else if (!converged)
    result.status = SolveStatus::no_convergence;
  return result;
}

HartreeResult minimize_hartree(double lambda, const GridPtr &grid,
                               const SolverOptions &options) {
  return minimize_mean_field(MeanFieldModel::coulomb(lambda), grid, options);
}

HartreeResult minimize_hartree_adaptive(double lambda,
                                        const SolverOptions &options,
                                        double repulsion, int max_extensions) {
  const auto model = MeanFieldModel::coulomb(lambda, repulsion);
  GridPtr grid = default_grid(lambda);
  auto result = minimize_mean_field(model, grid, options);
  for (int k = 0; k < max_extensions; ++k) {
    const bool leaking = result.converged &&
                         result.chemical_potential < -unbound_mu &&
                         result.boundary_mass >= unbound_mass;
    if (!leaking)
      break;
    grid = make_grid(GridScheme::uniform, 2 * grid->size(), 2 * grid->r_max());
    result = minimize_mean_field(model, grid, options);
  }
  return result;
}

GridPtr threshold_grid() {
  return make_grid(GridScheme::uniform, 20000, 200.0);
}

Curve epsilon_sweep(std::span<const double> lambdas, const GridPtr &grid,
                    const SolverOptions &options, const SweepOptions &sweep) {
  options.validate();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0))
      throw LabError(ErrorKind::invalid_argument, "lambda must be > 0");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
      throw LabError(ErrorKind::invalid_argument,
                     "lambda list must be strictly ascending");
    if (!sweep.allow_subcritical && !(lambdas[i] > lambda_star * 1.01))
      throw LabError(ErrorKind::invalid_argument,
                     "lambda " + std::to_string(lambdas[i]) +
                         " is not above 1.01 lambda_*");
  }

  Curve curve;
  curve.points.resize(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    const double lambda = lambdas[i];
    auto res = grid ? minimize_hartree(lambda, grid, options)
                    : minimize_hartree_adaptive(lambda, options);
    curve.points[i] = CurvePoint{lambda,
                                 res.bound && res.converged,
                                 res.status,
                                 res.energy,
                                 res.chemical_potential,
                                 res.breakdown,
                                 res.iterations,
                                 res.orbital.grid()->hash()};
  });

  const auto &p = curve.points;
  curve.has_gaps = std::any_of(p.begin(), p.end(),
                               [](const CurvePoint &c) { return !c.bound; });
  curve.all_negative = std::all_of(p.begin(), p.end(), [](const CurvePoint &c) {
    return c.bound && c.energy < 0.0;
  });
  curve.strictly_decreasing = true;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i].bound && p[i - 1].bound && !(p[i].energy < p[i - 1].energy))
      curve.strictly_decreasing = false;
  curve.max_second_difference = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 2; i < p.size(); ++i) {
    if (!(p[i].bound && p[i - 1].bound && p[i - 2].bound))
      continue;
    const double s1 = (p[i - 1].energy - p[i - 2].energy) /
                      (p[i - 1].lambda - p[i - 2].lambda);
    const double s2 =
        (p[i].energy - p[i - 1].energy) / (p[i].lambda - p[i - 1].lambda);
    const double dd = 2.0 * (s2 - s1) / (p[i].lambda - p[i - 2].lambda);
    curve.max_second_difference = std::max(curve.max_second_difference, dd);
  }
  curve.concave = curve.max_second_difference <= sweep.concavity_tolerance;
  if (p.size() < 3)
    curve.max_second_difference = 0.0;
  return curve;
}

CriticalEstimate critical_lambda(const GridPtr &grid,
                                 const SolverOptions &options,
                                 std::pair<double, double> bracket,
                                 double width) {
  options.validate();
  auto [lo, hi] = bracket;
  if (!(lo > 0.0) || !(hi > lo))
    throw LabError(ErrorKind::bad_bracket,
                   "bracket must satisfy 0 < lambda_lo < lambda_hi");
  if (!(width > 0.0))
    throw LabError(ErrorKind::invalid_argument, "width must be > 0");

  CriticalEstimate est;
  auto binds = [&](double lambda) {
    const auto res = minimize_hartree(lambda, grid, options);
    const bool b = res.bound && res.converged;
    ++est.solves;
    est.probes.emplace_back(lambda, b);
    return b;
  };
  const bool lo_bound = binds(lo);
  const bool hi_bound = binds(hi);
  if (lo_bound || !hi_bound)
    throw LabError(ErrorKind::bad_bracket,
                   std::string("bracket endpoints are ") +
                       (lo_bound ? "bound" : "unbound") + " and " +
                       (hi_bound ? "bound" : "unbound"));
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (binds(mid))
      hi = mid;
    else
      lo = mid;
  }
  est.estimate = 0.5 * (lo + hi);
  est.half_width = 0.5 * (hi - lo);
  return est;
}

} // namespace hartree_lab
