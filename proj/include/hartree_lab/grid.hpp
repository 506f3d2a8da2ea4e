#pragma once

// Radial grids and the one-body carriers that live on them.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace hartree_lab {

enum class GridScheme { uniform, log_spaced };

std::string_view to_string(GridScheme scheme);
GridScheme parse_grid_scheme(std::string_view text);

/// Nodes r_1 < ... < r_n = r_max on (0, r_max] with a local sixth-order
/// quadrature and seventh-point finite-difference stencils.
///
/// The interval [0, r_1] is integrated by extrapolating the interpolant
/// through the first nodes, so integrands need not vanish at the origin.
class RadialGrid {
public:
  static constexpr std::size_t quad_width = 6;
  static constexpr std::size_t stencil_width = 7;
  static constexpr std::size_t min_nodes = 16;

  RadialGrid(GridScheme scheme, std::size_t node_count, double r_max);

  GridScheme scheme() const noexcept { return scheme_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double r_max() const noexcept { return r_max_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double node(std::size_t i) const { return nodes_[i]; }

  /// Node spacing; only meaningful for uniform grids.
  double spacing() const noexcept { return nodes_[0]; }

  /// ∫_0^{r_max} f(r) dr.
  double integrate(std::span<const double> f) const;
  /// C_i = ∫_0^{r_i} f(r) dr for every node.
  std::vector<double> cumulative(std::span<const double> f) const;
  /// ∫ 4π r² ρ(r) dr.
  double radial_mass(std::span<const double> rho) const;

  std::vector<double> derivative(std::span<const double> f) const;
  std::vector<double> second_derivative(std::span<const double> f) const;

  /// Stable 64-bit fingerprint of (scheme, node_count, r_max).
  std::uint64_t hash() const noexcept;

  bool operator==(const RadialGrid &other) const noexcept {
    return scheme_ == other.scheme_ && r_max_ == other.r_max_ &&
           nodes_.size() == other.nodes_.size();
  }

private:
  struct IntervalRule {
    std::size_t start;
    std::array<double, quad_width> coeff;
  };
  struct Stencil {
    std::size_t start;
    std::array<double, stencil_width> d1;
    std::array<double, stencil_width> d2;
  };

  double interval_integral(std::size_t k, std::span<const double> f) const;
  void check_size(std::span<const double> f) const;

  GridScheme scheme_;
  double r_max_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<IntervalRule> intervals_;
  std::vector<Stencil> stencils_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(GridScheme scheme, std::size_t node_count, double r_max);

/// Uniform grid with 4000 nodes and r_max = 40/λ.
GridPtr default_grid(double lambda);

/// Reduced radial wave function u(r) = √(4π) r φ(r) with ∫u² dr = 1.
class Orbital {
public:
  Orbital(GridPtr grid, std::vector<double> values);

  /// Rescales values to unit norm. Throws on a vanishing input.
  static Orbital normalized(GridPtr grid, std::vector<double> values);

  const GridPtr &grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double norm_squared() const;
  /// φ(r_i) = u_i / (√(4π) r_i).
  std::vector<double> phi() const;

private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// ρ(r) ≥ 0 with ∫ 4π r² ρ dr = 1.
class RadialDensity {
public:
  RadialDensity(GridPtr grid, std::vector<double> values);

  static RadialDensity normalized(GridPtr grid, std::vector<double> values);
  static RadialDensity of(const Orbital &orbital);

  const GridPtr &grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double mass() const;
  /// The orbital √(4π) r √ρ.
  Orbital sqrt_orbital() const;

private:
  GridPtr grid_;
  std::vector<double> values_;
};

void require_same_grid(const RadialGrid &a, const RadialGrid &b);

// Analytic families used as trial states and test densities.

/// 1s orbital with decay a: φ = (a³/π)^{1/2} e^{-a r}.
Orbital hydrogenic_orbital(GridPtr grid, double decay);
RadialDensity hydrogenic_density(GridPtr grid, double decay);

/// Isotropic Gaussian density with per-axis variance s².
RadialDensity gaussian_density(GridPtr grid, double variance);
Orbital gaussian_orbital(GridPtr grid, double variance);

/// L¹ and L² distances between densities, in the 3-D measure.
double l1_distance(const RadialDensity &a, const RadialDensity &b);
double l2_distance(const RadialDensity &a, const RadialDensity &b);

/// Mass of 4πr²ρ beyond the fraction `outer_fraction` of r_max.
double outer_mass(const RadialDensity &rho, double outer_fraction = 0.95);

} // namespace hartree_lab
