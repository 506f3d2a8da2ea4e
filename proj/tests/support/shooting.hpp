#pragma once

// Independent reference solver for the Coulomb mean-field problem: outward
// Numerov shooting with energy bisection, trapezoid Poisson integrals with an
// end correction, and plain density mixing. Shares no code with the library.

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

struct ShootingResult {
  double energy;
  double eigenvalue;
  double repulsion; // ∫ V_H ρ d³q
  std::vector<double> r;
  std::vector<double> rho;
  int iterations;
};

// C_i = ∫_0^{r_i} f for f sampled at r_i = i h, trapezoid plus the first
// Euler-Maclaurin correction.
inline std::vector<double> running_integral(const std::vector<double> &f,
                                            double h) {
  const std::size_t n = f.size();
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    c[i] = c[i - 1] + 0.5 * h * (f[i] + f[i - 1]);
  const double d0 = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
  for (std::size_t i = 2; i < n; ++i) {
    const double di = (3 * f[i] - 4 * f[i - 1] + f[i - 2]) / (2 * h);
    c[i] -= h * h / 12 * (di - d0);
  }
  return c;
}

inline double total_integral(const std::vector<double> &f, double h) {
  return running_integral(f, h).back();
}

class ShootingSolver {
public:
  ShootingSolver(double lambda, double repulsion, double r_max,
                 std::size_t intervals)
      : lambda_(lambda), g_(repulsion), h_(r_max / intervals),
        r_(intervals + 1) {
    for (std::size_t i = 0; i < r_.size(); ++i)
      r_[i] = h_ * static_cast<double>(i);
  }

  // Shoots −½u'' + V u = E u from the origin; returns (nodes, u(R)).
  std::pair<int, double> shoot(const std::vector<double> &smooth, double e,
                               std::vector<double> *out = nullptr) const {
    const std::size_t n = r_.size();
    std::vector<double> u(n, 0.0);
    const double w0 = smooth[0];
    const double h = h_;
    u[1] = h - lambda_ * h * h + (lambda_ * lambda_ + w0 - e) / 3 * h * h * h;
    auto f = [&](std::size_t i) {
      return 2.0 * (-lambda_ / r_[i] + smooth[i] - e);
    };
    // (f u)(0) = 2 (−λ) u'(0) with u'(0) = 1.
    const double fu0 = -2.0 * lambda_;
    int nodes = 0;
    double f_prev = 0.0, f_cur = f(1);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double f_next = f(i + 1);
      const double prev_term = i == 1 ? -h * h / 12 * fu0 : u[i - 1] * (1 - h * h * f_prev / 12);
      u[i + 1] = (2 * u[i] * (1 + 5 * h * h * f_cur / 12) - prev_term) /
                 (1 - h * h * f_next / 12);
      if (u[i + 1] * u[i] < 0)
        ++nodes;
      if (std::abs(u[i + 1]) > 1e150) {
        if (out)
          *out = u;
        return {nodes, u[i + 1]};
      }
      f_prev = f_cur;
      f_cur = f_next;
    }
    if (out)
      *out = u;
    return {nodes, u.back()};
  }

  ShootingResult solve(double tolerance = 1e-12, int max_iterations = 400) const {
    constexpr double pi = std::numbers::pi;
    const std::size_t n = r_.size();
    std::vector<double> rho(n);
    for (std::size_t i = 0; i < n; ++i)
      rho[i] = lambda_ * lambda_ * lambda_ / pi * std::exp(-2 * lambda_ * r_[i]);

    double last = 1e300, eig = 0.0, energy = 0.0, pair = 0.0;
    int it = 0;
    for (; it < max_iterations; ++it) {
      const auto vh = hartree(rho);
      std::vector<double> smooth(n);
      for (std::size_t i = 0; i < n; ++i)
        smooth[i] = g_ * vh[i];

      double lo = -lambda_ * lambda_ * 0.5 - 1.0, hi = 0.5;
      for (int b = 0; b < 200 && hi - lo > 1e-15; ++b) {
        const double mid = 0.5 * (lo + hi);
        auto [nodes, tail] = shoot(smooth, mid);
        if (nodes == 0 && tail > 0)
          lo = mid;
        else
          hi = mid;
      }
      eig = 0.5 * (lo + hi);
      std::vector<double> u;
      shoot(smooth, lo, &u);
      // The shot diverges past the classically forbidden tail; cut it where
      // it starts growing again after the peak.
      std::size_t peak = 1;
      while (peak + 1 < n && u[peak + 1] >= u[peak])
        ++peak;
      std::size_t cut = n;
      for (std::size_t i = peak; i + 1 < n; ++i)
        if (u[i + 1] > u[i]) {
          cut = i + 1;
          break;
        }
      for (std::size_t i = cut; i < n; ++i)
        u[i] = 0.0;
      std::vector<double> u2(n);
      for (std::size_t i = 0; i < n; ++i)
        u2[i] = u[i] * u[i];
      const double norm = total_integral(u2, h_);
      std::vector<double> fresh(n, 0.0);
      for (std::size_t i = 1; i < n; ++i)
        fresh[i] = u2[i] / norm / (4 * pi * r_[i] * r_[i]);
      fresh[0] = 1.0 / (4 * pi * norm); // u ≈ r near the origin

      std::vector<double> vrho(n);
      const auto vh_fresh = hartree(fresh);
      for (std::size_t i = 0; i < n; ++i)
        vrho[i] = 4 * pi * r_[i] * r_[i] * vh_fresh[i] * fresh[i];
      pair = total_integral(vrho, h_);

      // ε = ½𝒦 − λ𝒞 + (g/2)ℐ evaluated directly on the fresh orbital.
      std::vector<double> du2(n), c(n);
      for (std::size_t i = 0; i < n; ++i) {
        double d;
        if (i == 0)
          d = (-25 * u[0] + 48 * u[1] - 36 * u[2] + 16 * u[3] - 3 * u[4]) / (12 * h_);
        else if (i == 1)
          d = (-3 * u[0] - 10 * u[1] + 18 * u[2] - 6 * u[3] + u[4]) / (12 * h_);
        else if (i + 2 >= n)
          d = 0.0;
        else
          d = (u[i - 2] - 8 * u[i - 1] + 8 * u[i + 1] - u[i + 2]) / (12 * h_);
        du2[i] = d * d / norm;
        c[i] = 4 * pi * r_[i] * fresh[i];
      }
      energy = 0.5 * total_integral(du2, h_) - lambda_ * total_integral(c, h_) +
               0.5 * g_ * pair;

      for (std::size_t i = 0; i < n; ++i)
        rho[i] = 0.5 * rho[i] + 0.5 * fresh[i];
      if (std::abs(energy - last) < tolerance && it > 3)
        break;
      last = energy;
    }
    return {energy, eig, pair, r_, rho, it};
  }

  std::vector<double> hartree(const std::vector<double> &rho) const {
    constexpr double pi = std::numbers::pi;
    const std::size_t n = rho.size();
    std::vector<double> inner(n), outer(n);
    for (std::size_t i = 0; i < n; ++i) {
      inner[i] = 4 * pi * r_[i] * r_[i] * rho[i];
      outer[i] = 4 * pi * r_[i] * rho[i];
    }
    const auto q = running_integral(inner, h_);
    const auto p = running_integral(outer, h_);
    std::vector<double> v(n);
    v[0] = p.back();
    for (std::size_t i = 1; i < n; ++i)
      v[i] = q[i] / r_[i] + p.back() - p[i];
    return v;
  }

private:
  double lambda_;
  double g_;
  double h_;
  std::vector<double> r_;
};

} // namespace oracle
