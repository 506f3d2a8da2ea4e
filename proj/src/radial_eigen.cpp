#include "hartree_lab/radial_eigen.hpp"

#include "hartree_lab/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hartree_lab {

namespace {

struct Tridiagonal {
  std::vector<double> lower; // a[i] multiplies x[i-1] in row i (a[0] unused)
  std::vector<double> diag;
  std::vector<double> upper; // c[i] multiplies x[i+1] in row i
};

// Gaussian elimination with partial pivoting for a general tridiagonal
// system (the LAPACK gtsv scheme). Overwrites b with the solution.
bool solve_tridiagonal(Tridiagonal m, std::vector<double> &b) {
  const std::size_t n = m.diag.size();
  std::vector<double> du2(n, 0.0);
  auto &dl = m.lower;
  auto &d = m.diag;
  auto &du = m.upper;
  // dl[i] is the subdiagonal entry in row i+1 for this routine.
  std::vector<double> sub(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i)
    sub[i] = dl[i + 1];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(sub[i])) {
      if (d[i] == 0.0)
        return false;
      const double f = sub[i] / d[i];
      d[i + 1] -= f * du[i];
      b[i + 1] -= f * b[i];
      sub[i] = 0.0;
    } else {
      const double f = d[i] / sub[i];
      d[i] = sub[i];
      const double tmp = d[i + 1];
      d[i + 1] = du[i] - f * tmp;
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du2[i];
      }
      du[i] = tmp;
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= f * b[i];
    }
  }
  if (d[n - 1] == 0.0)
    return false;
  b[n - 1] /= d[n - 1];
  if (n > 1)
    b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  for (std::size_t k = n - 2; k-- > 0;)
    b[k] = (b[k] - du[k] * b[k + 1] - du2[k] * b[k + 2]) / d[k];
  return true;
}

// Number of eigenvalues of the symmetric tridiagonal (d, e) below sigma.
std::size_t sturm_count(const std::vector<double> &d, double e, double sigma) {
  std::size_t count = 0;
  double q = d[0] - sigma;
  if (q < 0.0)
    ++count;
  const double e2 = e * e;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (q == 0.0)
      q = 1e-300;
    q = d[i] - sigma - e2 / q;
    if (q < 0.0)
      ++count;
  }
  return count;
}

double lowest_three_point_eigenvalue(const std::vector<double> &d, double e) {
  double lo = *std::min_element(d.begin(), d.end()) - 2.0 * std::abs(e);
  double hi = *std::max_element(d.begin(), d.end()) + 2.0 * std::abs(e);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count(d, e, mid) >= 1)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(mid)))
      break;
  }
  return 0.5 * (lo + hi);
}

std::size_t sign_changes(const std::vector<double> &x) {
  const double scale =
      std::abs(*std::max_element(x.begin(), x.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
      }));
  const double eps = 1e-10 * scale;
  std::size_t changes = 0;
  int last = 0;
  for (double v : x) {
    if (std::abs(v) <= eps)
      continue;
    const int s = v > 0 ? 1 : -1;
    if (last != 0 && s != last)
      ++changes;
    last = s;
  }
  return changes;
}

class NumerovProblem {
public:
  NumerovProblem(double h, std::span<const double> v, double c)
      : m_(v.size() - 1) {
    const double k = 0.5 / (h * h);
    a_.lower.assign(m_, 0.0);
    a_.diag.assign(m_, 0.0);
    a_.upper.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      a_.diag[i] = 2.0 * k + 10.0 / 12.0 * v[i];
      if (i > 0)
        a_.lower[i] = -k + v[i - 1] / 12.0;
      if (i + 1 < m_)
        a_.upper[i] = -k + v[i + 1] / 12.0;
    }
    // (Vu)(0) = −c u'(0) with u'(0) ≈ (4u_1 − u_2) / 2h.
    a_.diag[0] += -c / (6.0 * h);
    a_.upper[0] += c / (24.0 * h);
  }

  std::size_t size() const { return m_; }

  std::vector<double> apply_b(const std::vector<double> &x) const {
    std::vector<double> y(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 10.0 * x[i];
      if (i > 0)
        s += x[i - 1];
      if (i + 1 < m_)
        s += x[i + 1];
      y[i] = s / 12.0;
    }
    return y;
  }

  // B + tau A.
  Tridiagonal flow(double tau) const {
    Tridiagonal t = a_;
    for (std::size_t i = 0; i < m_; ++i) {
      t.diag[i] = tau * t.diag[i] + 10.0 / 12.0;
      if (i > 0)
        t.lower[i] = tau * t.lower[i] + 1.0 / 12.0;
      if (i + 1 < m_)
        t.upper[i] = tau * t.upper[i] + 1.0 / 12.0;
    }
    return t;
  }

  Tridiagonal shifted(double sigma) const {
    Tridiagonal t = a_;
    for (std::size_t i = 0; i < m_; ++i) {
      t.diag[i] -= sigma * 10.0 / 12.0;
      if (i > 0)
        t.lower[i] -= sigma / 12.0;
      if (i + 1 < m_)
        t.upper[i] -= sigma / 12.0;
    }
    return t;
  }

private:
  std::size_t m_;
  Tridiagonal a_;
};

struct InverseIteration {
  double eigenvalue;
  std::vector<double> vector;
  bool ok;
};

InverseIteration inverse_iterate(const NumerovProblem &p, double sigma,
                                 std::vector<double> x, int max_iterations) {
  const auto shifted = p.shifted(sigma);
  auto normalize = [](std::vector<double> &v) {
    double s = 0.0;
    for (double e : v)
      s += e * e;
    s = std::sqrt(s);
    for (double &e : v)
      e /= s;
  };
  normalize(x);
  double eig = sigma;
  bool settled = false;
  for (int it = 0; it < max_iterations && !settled; ++it) {
    auto y = p.apply_b(x);
    if (!solve_tridiagonal(shifted, y))
      return {sigma, x, false};
    double xy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      xy += x[i] * y[i];
    if (xy == 0.0 || !std::isfinite(xy))
      return {sigma, x, false};
    const double next = sigma + 1.0 / xy;
    if (xy < 0.0)
      for (double &e : y)
        e = -e;
    normalize(y);
    double diff = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      diff = std::max(diff, std::abs(y[i] - x[i]));
    x = std::move(y);
    settled = it > 0 &&
              std::abs(next - eig) <= 1e-14 * std::max(1.0, std::abs(next)) &&
              diff < 1e-11;
    eig = next;
  }
  return {eig, std::move(x), settled};
}

} // namespace

GroundState radial_ground_state(const GridPtr &grid,
                                std::span<const double> potential,
                                double coulomb_strength,
                                const std::optional<GroundState> &guess) {
  if (grid->scheme() != GridScheme::uniform)
    throw LabError(ErrorKind::invalid_argument,
                   "the radial eigensolver needs a uniform grid");
  if (potential.size() != grid->size())
    throw LabError(ErrorKind::grid_mismatch, "potential size mismatch");

  const double h = grid->spacing();
  const NumerovProblem problem(h, potential, coulomb_strength);
  const std::size_t m = problem.size();
  const auto r = grid->nodes();

  auto finish = [&](const InverseIteration &it) -> std::optional<GroundState> {
    if (!it.ok || sign_changes(it.vector) != 0)
      return std::nullopt;
    std::vector<double> u(grid->size(), 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      sum += it.vector[i];
    const double s = sum >= 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < m; ++i)
      u[i] = std::max(0.0, s * it.vector[i]);
    return GroundState{it.eigenvalue, Orbital::normalized(grid, std::move(u))};
  };

  if (guess) {
    std::vector<double> x(guess->orbital.values().begin(),
                          guess->orbital.values().begin() +
                              static_cast<std::ptrdiff_t>(m));
    const double sigma =
        guess->eigenvalue - 1e-8 * std::max(1.0, std::abs(guess->eigenvalue));
    if (auto gs = finish(inverse_iterate(problem, sigma, std::move(x), 40)))
      return *gs;
  }

  std::vector<double> d(m);
  const double e = -0.5 / (h * h);
  for (std::size_t i = 0; i < m; ++i)
    d[i] = 1.0 / (h * h) + potential[i];
  const double e_fd = lowest_three_point_eigenvalue(d, e);

  std::vector<double> x(m);
  for (std::size_t i = 0; i < m; ++i)
    x[i] = r[i] * (r[m - 1] + h - r[i]);
  for (double shift : {0.0, 1e-6, 1e-4, 1e-2}) {
    const double sigma = e_fd - shift * std::max(1.0, std::abs(e_fd));
    if (auto gs = finish(inverse_iterate(problem, sigma, x, 300)))
      return *gs;
  }
  throw LabError(ErrorKind::eigensolver_failure,
                 "inverse iteration did not reach a nodeless eigenvector");
}

Orbital imaginary_time_step(const Orbital &orbital,
                            std::span<const double> potential,
                            double coulomb_strength, double tau) {
  const auto &grid = orbital.grid();
  if (grid->scheme() != GridScheme::uniform)
    throw LabError(ErrorKind::invalid_argument,
                   "imaginary-time flow needs a uniform grid");
  if (potential.size() != grid->size())
    throw LabError(ErrorKind::grid_mismatch, "potential size mismatch");
  const NumerovProblem problem(grid->spacing(), potential, coulomb_strength);
  const std::size_t m = problem.size();
  std::vector<double> x(orbital.values().begin(),
                        orbital.values().begin() + static_cast<std::ptrdiff_t>(m));
  auto y = problem.apply_b(x);
  if (!solve_tridiagonal(problem.flow(tau), y))
    throw LabError(ErrorKind::eigensolver_failure, "singular flow step");
  std::vector<double> u(grid->size(), 0.0);
  for (std::size_t i = 0; i < m; ++i)
    u[i] = std::max(0.0, y[i]);
  return Orbital::normalized(grid, std::move(u));
}

} // namespace hartree_lab
