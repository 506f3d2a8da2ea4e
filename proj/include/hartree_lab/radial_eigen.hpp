#pragma once

#include "hartree_lab/grid.hpp"

#include <optional>
#include <span>

namespace hartree_lab {

struct GroundState {
  double eigenvalue;
  Orbital orbital;
};

/// Lowest eigenpair of −½u'' + V u on a uniform grid with u(0) = u(r_max) = 0.
///
/// Discretized with the Numerov three-point stencil (a tridiagonal
/// generalized problem A u = E B u). `coulomb_strength` is c in V ~ −c/r
/// near the origin and fixes the (Vu)(0) = −c u'(0) boundary term.
/// `guess`, when given, seeds inverse iteration; otherwise the shift comes
/// from Sturm bisection on the plain three-point operator.
GroundState radial_ground_state(const GridPtr &grid,
                                std::span<const double> potential,
                                double coulomb_strength,
                                const std::optional<GroundState> &guess = {});

/// One backward-Euler step of normalized imaginary-time flow,
/// u ← (B + τA)⁻¹ B u renormalized, with the same Numerov discretization.
Orbital imaginary_time_step(const Orbital &orbital,
                            std::span<const double> potential,
                            double coulomb_strength, double tau);

} // namespace hartree_lab
