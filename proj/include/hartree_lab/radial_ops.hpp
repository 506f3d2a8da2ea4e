#pragma once

#include "hartree_lab/grid.hpp"

#include <vector>

namespace hartree_lab {

/// Coulomb potential of a radial charge distribution,
///   V(r) = (1/r) ∫_0^r 4πs²ρ ds + ∫_r^∞ 4πsρ ds.
std::vector<double> radial_poisson(const RadialDensity &density);

/// Same convolution for an arbitrary non-negative radial table (not
/// necessarily normalized).
std::vector<double> radial_poisson(const RadialGrid &grid,
                                   std::span<const double> rho);

/// e^{tΔ}ρ through the radial reduction of the 3-D heat kernel. Throws
/// grid-overflow when more than 1e-4 of the mass leaves [0, r_max].
RadialDensity heat_flow(const RadialDensity &density, double t);

} // namespace hartree_lab
