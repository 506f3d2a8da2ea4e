#include "hartree_lab/radial_ops.hpp"

#include "hartree_lab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hartree_lab {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double leak_tolerance = 1e-4;
} // namespace

std::vector<double> radial_poisson(const RadialGrid &grid,
                                   std::span<const double> rho) {
  const auto r = grid.nodes();
  const std::size_t n = r.size();
  std::vector<double> inner(n), outer(n);
  for (std::size_t i = 0; i < n; ++i) {
    inner[i] = 4.0 * pi * r[i] * r[i] * rho[i];
    outer[i] = 4.0 * pi * r[i] * rho[i];
  }
  const auto q = grid.cumulative(inner);
  const auto p = grid.cumulative(outer);
  // Carry exactly the charge the quadrature weights assign to rho.
  const double charge = grid.radial_mass(rho);
  const double c = q.back() != 0.0 ? charge / q.back() : 1.0;
  const double p_total = p.back();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = c * (q[i] / r[i] + (p_total - p[i]));
  return v;
}

std::vector<double> radial_poisson(const RadialDensity &density) {
  return radial_poisson(*density.grid(), density.values());
}

RadialDensity heat_flow(const RadialDensity &density, double t) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw LabError(ErrorKind::invalid_argument, "heat-flow time must be > 0");
  const auto &grid = *density.grid();
  const auto r = grid.nodes();
  const auto w = grid.weights();
  const auto rho = density.values();
  const std::size_t n = r.size();

  // Source masses m_j = w_j 4π r_j² ρ_j.
  std::vector<double> m(n);
  for (std::size_t j = 0; j < n; ++j)
    m[j] = w[j] * 4.0 * pi * r[j] * r[j] * rho[j];

  // K_t(r, s) = (4πt)^{-3/2} (t / (r s)) e^{-(r-s)²/4t} (1 - e^{-rs/t}).
  const double pref = std::pow(4.0 * pi * t, -1.5) * t;
  const double reach = std::sqrt(4.0 * t * 745.0);
  // Where the kernel is narrower than the local spacing the sum cannot
  // resolve it; there ρ + tΔρ is accurate to O(t²).
  std::vector<double> r_rho(n);
  for (std::size_t j = 0; j < n; ++j)
    r_rho[j] = r[j] * rho[j];
  const auto laplacian_r = grid.second_derivative(r_rho);
  const double width = std::sqrt(2.0 * t);

  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double spacing = i + 1 < n ? r[i + 1] - r[i] : r[i] - r[i - 1];
    if (width < 1.5 * spacing) {
      out[i] = std::max(0.0, rho[i] + t * laplacian_r[i] / r[i]);
      continue;
    }
    const auto lo = std::lower_bound(r.begin(), r.end(), r[i] - reach);
    const auto hi = std::upper_bound(r.begin(), r.end(), r[i] + reach);
    double s = 0.0;
    for (auto j = static_cast<std::size_t>(lo - r.begin());
         j < static_cast<std::size_t>(hi - r.begin()); ++j) {
      if (m[j] == 0.0)
        continue;
      const double d = r[i] - r[j];
      const double d2 = d * d;
      const double prod = r[i] * r[j];
      s += m[j] * std::exp(-d2 / (4.0 * t)) * -std::expm1(-prod / t) / prod;
    }
    out[i] = pref * s;
  }

  RadialDensity evolved(density.grid(), std::move(out));
  const double leak = density.mass() - evolved.mass();
  if (leak > leak_tolerance)
    throw LabError(ErrorKind::grid_overflow,
                   "heat flow leaks " + std::to_string(leak) +
                       " of the mass past r_max");
  return RadialDensity::normalized(density.grid(),
                                   {evolved.values().begin(),
                                    evolved.values().end()});
}

} // namespace hartree_lab
