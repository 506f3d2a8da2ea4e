#pragma once

// Scalar functionals of radial one-body objects and of Gaussian families.
// Units: ħ = m = 1 and z²e² = 1.

#include "hartree_lab/grid.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace hartree_lab {

struct EnergyBreakdown {
  double kinetic = 0.0;    // ½𝒦
  double attraction = 0.0; // −λ𝒞 (or +λ⟨r²⟩ for the trap)
  double repulsion = 0.0;  // ½ × pair energy
  double total = 0.0;

  static EnergyBreakdown of(double kinetic, double attraction,
                            double repulsion) {
    return {kinetic, attraction, repulsion, kinetic + attraction + repulsion};
  }
  /// Everything but the kinetic part.
  double potential() const { return attraction + repulsion; }
};

/// ∫|∇φ|² d³q = ∫ (u')² dr.
double kinetic_K(const Orbital &orbital);

/// ⟨1/|q|⟩.
double attraction_C(const RadialDensity &density);

/// ∬ ρ_a(x) ρ_b(y) / |x − y|.
double repulsion_I(const RadialDensity &a, const RadialDensity &b);

/// ½𝒦 − λ𝒞 + (g/2)ℐ, with g = 1 for the physical functional.
EnergyBreakdown hartree_energy(const Orbital &orbital, double lambda,
                               double repulsion_coupling = 1.0);

/// The finite-N Hartree functional on Φ(q) = N^{3/2} φ(Nq), split into the
/// leading N³ 𝒽_λ(φ) and the self-interaction correction −N² ½ℐ.
struct FiniteNHartree {
  double scaled = 0.0;
  double correction = 0.0;
  double total() const { return scaled + correction; }
};
FiniteNHartree finite_n_hartree(const Orbital &orbital, double lambda, int n);

/// ∫ |∇ρ|²/ρ. Nodes with ρ below `fisher_floor` are dropped; a dip below the
/// floor strictly inside the support throws non-smooth-density.
inline constexpr double fisher_floor = 1e-30;
double fisher_information(const RadialDensity &density);

/// −∫ ρ ln ρ, reference length 1.
double gibbs_entropy(const RadialDensity &density);

/// Entropy production along ∂_t ρ = Δρ: the centered difference of 𝒮 at
/// t ± δ against ℱ(e^{tΔ}ρ).
struct DeBruijnCheck {
  double t = 0.0;
  double entropy_rate = 0.0;
  double fisher = 0.0;
  double relative_error = 0.0;
};
DeBruijnCheck de_bruijn_check(const RadialDensity &density, double t,
                              double delta = 1e-3);

/// ⟨|q|²⟩.
double second_moment(const RadialDensity &density);

/// Normalized Gaussian pair kernel U(t) = (2πw²)^{-3/2} e^{−t²/2w²} on the
/// grid nodes.
std::vector<double> gaussian_pair_kernel(const RadialGrid &grid, double width);

/// W(r) = ∫ U(|x − y|) ρ(y) d³y for a radial kernel table U on the grid
/// nodes (U = 0 beyond r_max).
std::vector<double> pair_kernel_potential(const RadialDensity &density,
                                          std::span<const double> kernel);

/// ∬ U(|x − y|) ρ(x) ρ(y).
double pair_kernel_energy(const RadialDensity &density,
                          std::span<const double> kernel);

/// Throws non-repulsive-kernel on negative or non-finite entries.
void validate_pair_kernel(const RadialGrid &grid,
                          std::span<const double> kernel);

/// Harmonic-trap mean-field energy ½𝒦 + λ_trap⟨r²⟩ + ½∬Uρρ.
EnergyBreakdown trap_energy(const Orbital &orbital, double trap_strength,
                            std::span<const double> kernel);

/// Closed-form ground energy (3/2)√(2λ_trap) of ½𝒦 + λ_trap⟨r²⟩.
double oscillator_ground_energy(double trap_strength);

// --- Gaussian densities on ℝ^{3n} -----------------------------------------

class GaussianSpec {
public:
  explicit GaussianSpec(Eigen::MatrixXd covariance);
  static GaussianSpec isotropic(int particles, double variance);

  int dimension() const { return static_cast<int>(covariance_.rows()); }
  const Eigen::MatrixXd &covariance() const { return covariance_; }
  /// Marginal on coordinates [first, first + count).
  GaussianSpec marginal(int first, int count) const;

private:
  Eigen::MatrixXd covariance_;
};

/// tr(Σ⁻¹).
double fisher_information(const GaussianSpec &spec);
/// ½ ln((2πe)^d det Σ).
double gibbs_entropy(const GaussianSpec &spec);

struct SuperadditivityReport {
  double joint = 0.0;  // ℱ of the full density
  double first = 0.0;  // ℱ of the leading marginal
  double second = 0.0; // ℱ of the trailing marginal
  double gap = 0.0;    // joint − first − second
  double cross_norm = 0.0;
  bool superadditive = false;
  bool monotone = false;
  bool equality = false;
};

/// Splits coordinates into [0, split) and [split, d) and compares Fisher
/// informations. `equality` is decided relative to `tolerance`·joint.
SuperadditivityReport fisher_superadditivity(const GaussianSpec &spec,
                                             int split,
                                             double tolerance = 1e-12);

} // namespace hartree_lab
