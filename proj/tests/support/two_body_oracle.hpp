#pragma once

// Dense-basis two-body reference. Matrix elements come from derivatives of
//   ∫∫ e^{−αr₁−βr₂−γr₁₂} / (r₁ r₂ r₁₂) = 16π² / ((α+β)(β+γ)(α+γ))
// at γ = 0, kinetic terms from the gradient (not Laplacian) form, all in
// long double, with near-null overlap directions dropped instead of rejected.

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

using Real = long double;
using MatrixR = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

inline Real fact(int n) {
  Real f = 1;
  for (int i = 2; i <= n; ++i)
    f *= i;
  return f;
}

inline Real choose(int n, int k) { return fact(n) / (fact(k) * fact(n - k)); }

// ∫∫ r₁^i r₂^j r₁₂^k e^{−αr₁−βr₂} d³r₁ d³r₂, i, j, k ≥ −1.
inline Real hylleraas(int i, int j, int k, Real alpha, Real beta) {
  const int p = i + 1, q = j + 1, s = k + 1;
  const Real ab = alpha + beta;
  Real sum = 0;
  for (int p1 = 0; p1 <= p; ++p1)
    for (int q1 = 0; q1 <= q; ++q1)
      for (int s1 = 0; s1 <= s; ++s1) {
        const int p2 = p - p1, q2 = q - q1, s2 = s - s1;
        sum += choose(p, p1) * choose(q, q1) * choose(s, s1) *
               fact(p1 + q1) / std::pow(ab, p1 + q1 + 1) *
               fact(q2 + s1) / std::pow(beta, q2 + s1 + 1) *
               fact(p2 + s2) / std::pow(alpha, p2 + s2 + 1);
      }
  const Real pi = std::numbers::pi_v<Real>;
  return 16 * pi * pi * sum;
}

struct Prim {
  Real a, b;
  int k;
};

struct Elements {
  Real s = 0, t = 0, v = 0, w = 0;
};

// ½(∇₁f·∇₁g + ∇₂f·∇₂g) for f, g = e^{−a r₁ − b r₂} r₁₂^k, integrated.
inline Elements prim_elements(const Prim &f, const Prim &g) {
  const Real al = f.a + g.a, be = f.b + g.b;
  const int kk = f.k + g.k;
  Elements e;
  e.s = hylleraas(0, 0, kk, al, be);
  e.v = hylleraas(-1, 0, kk, al, be) + hylleraas(0, -1, kk, al, be);
  e.w = hylleraas(0, 0, kk - 1, al, be);
  Real t = (f.a * g.a + f.b * g.b) * hylleraas(0, 0, kk, al, be);
  if (f.k * g.k)
    t += 2 * f.k * g.k * hylleraas(0, 0, kk - 2, al, be);
  // cross terms: particle 1 with cos = (r₁² − r₂² + u²)/(2 r₁ u), particle 2 mirrored
  const Real c1 = -(f.a * g.k + g.a * f.k);
  const Real c2 = -(f.b * g.k + g.b * f.k);
  if (kk > 0) {
    t += c1 * 0.5L * (hylleraas(1, 0, kk - 2, al, be) - hylleraas(-1, 2, kk - 2, al, be) +
                      hylleraas(-1, 0, kk, al, be));
    t += c2 * 0.5L * (hylleraas(0, 1, kk - 2, al, be) - hylleraas(2, -1, kk - 2, al, be) +
                      hylleraas(0, -1, kk, al, be));
  }
  e.t = 0.5L * t;
  return e;
}

// Lowest eigenvalue of −½Δ₁ − ½Δ₂ − λ(1/r₁ + 1/r₂) + κ/r₁₂ on symmetric
// pairs of `exponents` times r₁₂^{0,1}.
inline double two_body_reference(const std::vector<double> &exponents, double lambda,
                                 double kappa, Real drop = 1e-16L) {
  std::vector<Prim> basis;
  for (int k = 0; k <= 1; ++k)
    for (std::size_t i = 0; i < exponents.size(); ++i)
      for (std::size_t j = i; j < exponents.size(); ++j)
        basis.push_back({exponents[i], exponents[j], k});
  const auto n = static_cast<Eigen::Index>(basis.size());
  MatrixR s(n, n), h(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      Elements sum;
      const Prim fs[2] = {basis[r], {basis[r].b, basis[r].a, basis[r].k}};
      const Prim gs[2] = {basis[c], {basis[c].b, basis[c].a, basis[c].k}};
      for (const auto &f : fs)
        for (const auto &g : gs) {
          const auto e = prim_elements(f, g);
          sum.s += e.s;
          sum.t += e.t;
          sum.v += e.v;
          sum.w += e.w;
        }
      s(r, c) = sum.s;
      h(r, c) = sum.t - lambda * sum.v + kappa * sum.w;
    }
  Eigen::Matrix<Real, Eigen::Dynamic, 1> d = s.diagonal().cwiseSqrt().cwiseInverse();
  s = d.asDiagonal() * s * d.asDiagonal();
  h = d.asDiagonal() * h * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixR> se(s);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (se.eigenvalues()[i] > drop)
      keep.push_back(i);
  MatrixR x(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    x.col(static_cast<Eigen::Index>(c)) =
        se.eigenvectors().col(keep[c]) / std::sqrt(se.eigenvalues()[keep[c]]);
  MatrixR hx = x.transpose() * h * x;
  Eigen::SelfAdjointEigenSolver<MatrixR> he((hx + hx.transpose()) / 2);
  return static_cast<double>(he.eigenvalues()[0]);
}

} // namespace oracle
