#pragma once

// Self-consistent minimization of the mean-field functional
//   ½𝒦 − λ𝒞 + (g/2)ℐ  (+ λ_trap⟨r²⟩ + ½∬Uρρ for the trapped variant)
// over normalized radial orbitals.

#include "hartree_lab/functionals.hpp"
#include "hartree_lab/grid.hpp"
#include "hartree_lab/radial_eigen.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hartree_lab {

/// Mean-field coupling threshold λ_* ≈ 1/1.21.
inline constexpr double lambda_star = 1.0 / 1.21;

/// Bound diagnostics: μ < −unbound_mu and outer-5% mass < unbound_mass.
inline constexpr double unbound_mu = 1e-6;
inline constexpr double unbound_mass = 1e-8;

enum class InitialGuess { hydrogenic, gaussian, random_positive };

std::string_view to_string(InitialGuess guess);
InitialGuess parse_initial_guess(std::string_view text);

struct SolverOptions {
  double mixing = 0.4;
  int max_iterations = 500;
  double residual_tolerance = 1e-10;
  InitialGuess initial_guess = InitialGuess::hydrogenic;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Couplings of the one-body mean-field operator −½Δ + V_eff[ρ].
struct MeanFieldModel {
  double attraction = 1.0;  // λ in −λ/r
  double repulsion = 1.0;   // g multiplying the Hartree potential
  double trap = 0.0;        // λ_trap in λ_trap r²
  std::vector<double> pair_kernel; // short-range U(t) on the grid nodes

  static MeanFieldModel coulomb(double lambda, double repulsion = 1.0);
  static MeanFieldModel harmonic(double trap, std::vector<double> kernel);

  bool trapped() const { return trap > 0.0 || !pair_kernel.empty(); }
};

/// V_eff(r) = −λ/r + V_H[ρ](r).
std::vector<double> effective_potential(const RadialDensity &density,
                                        double lambda);
std::vector<double> effective_potential(const RadialDensity &density,
                                        const MeanFieldModel &model);

EnergyBreakdown model_energy(const Orbital &orbital,
                             const MeanFieldModel &model);

/// One damped fixed-point step. `input` is the density the potential is built
/// from; `ground` is the ground state of −½Δ + V_eff[input].
struct ScfState {
  RadialDensity input;
  GroundState ground;
};

struct ScfStep {
  Orbital orbital;      // ground eigenfunction of the mixed potential
  double residual;      // ‖ρ_new − ρ_old‖ in L²(d³q)
  double eigenvalue;    // its eigenvalue
  bool unbound_iterate; // no negative eigenvalue
  ScfState next;
};

ScfState scf_start(const Orbital &orbital, const MeanFieldModel &model);
ScfStep scf_step(const ScfState &state, const MeanFieldModel &model,
                 const SolverOptions &options);
ScfStep scf_step(const Orbital &orbital, double lambda,
                 const SolverOptions &options);

enum class SolveStatus { converged, not_bound, no_convergence };

std::string_view to_string(SolveStatus status);

struct HartreeResult {
  double lambda = 0.0;
  double energy = 0.0;
  double chemical_potential = 0.0;
  EnergyBreakdown breakdown;
  Orbital orbital;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool bound = false;
  double boundary_mass = 0.0;
  bool used_gradient_flow = false;
  SolveStatus status = SolveStatus::no_convergence;
  std::vector<double> energy_history; // energies of accepted iterates

  /// |2T + V| / |ε|.
  double virial_ratio() const;
  /// |ℱ(ρ) + 8ε| / |8ε|.
  double fisher_ratio() const;
};

Orbital initial_orbital(const GridPtr &grid, const MeanFieldModel &model,
                        const SolverOptions &options);

HartreeResult minimize_mean_field(const MeanFieldModel &model,
                                  const GridPtr &grid,
                                  const SolverOptions &options,
                                  const std::optional<Orbital> &start = {});

HartreeResult minimize_hartree(double lambda, const GridPtr &grid,
                               const SolverOptions &options);

/// Starts on default_grid(λ) and doubles r_max at fixed spacing (up to
/// `max_extensions` times) while the state binds but leaks past the box.
HartreeResult minimize_hartree_adaptive(double lambda,
                                        const SolverOptions &options,
                                        double repulsion = 1.0,
                                        int max_extensions = 3);

/// Uniform grid long enough for states near the binding threshold.
GridPtr threshold_grid();

struct CurvePoint {
  double lambda = 0.0;
  bool bound = false;
  SolveStatus status = SolveStatus::no_convergence;
  double energy = 0.0;
  double chemical_potential = 0.0;
  EnergyBreakdown breakdown;
  int iterations = 0;
  std::uint64_t grid_hash = 0;
};

struct Curve {
  std::vector<CurvePoint> points; // ascending in λ
  bool all_negative = false;
  bool strictly_decreasing = false;
  double max_second_difference = 0.0;
  bool concave = false;
  bool has_gaps = false;
};

struct SweepOptions {
  bool allow_subcritical = false;
  double concavity_tolerance = 1e-6;
};

/// ε(λ) along a list of couplings, one independent solve per entry. A null
/// grid selects minimize_hartree_adaptive.
Curve epsilon_sweep(std::span<const double> lambdas, const GridPtr &grid,
                    const SolverOptions &options,
                    const SweepOptions &sweep = {});

struct CriticalEstimate {
  double estimate = 0.0;
  double half_width = 0.0;
  int solves = 0;
  std::vector<std::pair<double, bool>> probes;
};

CriticalEstimate critical_lambda(const GridPtr &grid,
                                 const SolverOptions &options,
                                 std::pair<double, double> bracket,
                                 double width = 1e-3);

} // namespace hartree_lab
