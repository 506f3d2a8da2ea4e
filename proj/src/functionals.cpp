#include "hartree_lab/functionals.hpp"

#include "hartree_lab/error.hpp"
#include "hartree_lab/radial_ops.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hartree_lab {

namespace {

constexpr double pi = std::numbers::pi;

// Cubic Hermite interpolant of G(t) = ∫_0^t U(τ) τ dτ through (0, r_1..r_n),
// held constant past r_max.
class KernelPrimitive {
public:
  KernelPrimitive(const RadialGrid &grid, std::span<const double> kernel)
      : uniform_(grid.scheme() == GridScheme::uniform) {
    const auto r = grid.nodes();
    const std::size_t n = r.size();
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i)
      integrand[i] = kernel[i] * r[i];
    const auto g = grid.cumulative(integrand);
    t_.reserve(n + 1);
    g_.reserve(n + 1);
    dg_.reserve(n + 1);
    t_.push_back(0.0);
    g_.push_back(0.0);
    dg_.push_back(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      t_.push_back(r[i]);
      g_.push_back(g[i]);
      dg_.push_back(integrand[i]);
    }
    h_ = uniform_ ? r[0] : 0.0;
  }

  double operator()(double t) const {
    if (t <= 0.0)
      return 0.0;
    if (t >= t_.back())
      return g_.back();
    std::size_t k;
    if (uniform_) {
      k = std::min(static_cast<std::size_t>(t / h_), t_.size() - 2);
    } else {
      k = static_cast<std::size_t>(
              std::upper_bound(t_.begin(), t_.end(), t) - t_.begin()) -
          1;
    }
    const double a = t_[k];
    const double b = t_[k + 1];
    const double dt = b - a;
    const double x = (t - a) / dt;
    const double h00 = (1 + 2 * x) * (1 - x) * (1 - x);
    const double h10 = x * (1 - x) * (1 - x);
    const double h01 = x * x * (3 - 2 * x);
    const double h11 = x * x * (x - 1);
    return h00 * g_[k] + h10 * dt * dg_[k] + h01 * g_[k + 1] +
           h11 * dt * dg_[k + 1];
  }

private:
  bool uniform_;
  double h_ = 0.0;
  std::vector<double> t_, g_, dg_;
};

} // namespace

double kinetic_K(const Orbital &orbital) {
  const auto &grid = *orbital.grid();
  auto du = grid.derivative(orbital.values());
  for (auto &v : du)
    v *= v;
  return grid.integrate(du);
}

double attraction_C(const RadialDensity &density) {
  const auto &grid = *density.grid();
  const auto r = grid.nodes();
  const auto rho = density.values();
  std::vector<double> f(r.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = 4.0 * pi * r[i] * rho[i];
  return grid.integrate(f);
}

double repulsion_I(const RadialDensity &a, const RadialDensity &b) {
  require_same_grid(*a.grid(), *b.grid());
  const auto &grid = *a.grid();
  const auto ra = a.values();
  const auto rb = b.values();
  std::vector<double> f(ra.size());
  if (ra.data() == rb.data()) {
    const auto v = radial_poisson(a);
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] = v[i] * ra[i];
    return grid.radial_mass(f);
  }
  const auto va = radial_poisson(b);
  const auto vb = radial_poisson(a);
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = 0.5 * (va[i] * ra[i] + vb[i] * rb[i]);
  return grid.radial_mass(f);
}

EnergyBreakdown hartree_energy(const Orbital &orbital, double lambda,
                               double repulsion_coupling) {
  if (!(lambda > 0.0))
    throw LabError(ErrorKind::invalid_argument, "lambda must be > 0");
  const auto rho = RadialDensity::of(orbital);
  const double k = 0.5 * kinetic_K(orbital);
  const double a = -lambda * attraction_C(rho);
  const double r =
      repulsion_coupling == 0.0 ? 0.0
                                : 0.5 * repulsion_coupling * repulsion_I(rho, rho);
  return EnergyBreakdown::of(k, a, r);
}

FiniteNHartree finite_n_hartree(const Orbital &orbital, double lambda, int n) {
  if (n < 1)
    throw LabError(ErrorKind::invalid_argument, "N must be >= 1");
  const auto parts = hartree_energy(orbital, lambda);
  const double nn = static_cast<double>(n);
  return {nn * nn * nn * parts.total, -nn * nn * parts.repulsion};
}

double fisher_information(const RadialDensity &density) {
  const auto &grid = *density.grid();
  const auto r = grid.nodes();
  const auto rho = density.values();
  const std::size_t n = rho.size();

  std::size_t first = n, last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rho[i] >= fisher_floor) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first == n)
    throw LabError(ErrorKind::non_smooth_density, "density below floor");
  for (std::size_t i = first; i <= last; ++i)
    if (rho[i] < fisher_floor)
      throw LabError(ErrorKind::non_smooth_density,
                     "density vanishes at interior node r = " +
                         std::to_string(r[i]));

  const auto drho = grid.derivative(rho);
  std::vector<double> f(n, 0.0);
  for (std::size_t i = first; i <= last; ++i)
    f[i] = 4.0 * pi * r[i] * r[i] * drho[i] * drho[i] / rho[i];
  return grid.integrate(f);
}

double gibbs_entropy(const RadialDensity &density) {
  const auto &grid = *density.grid();
  const auto rho = density.values();
  std::vector<double> f(rho.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (rho[i] > 0.0)
      f[i] = -rho[i] * std::log(rho[i]);
  return grid.radial_mass(f);
}

DeBruijnCheck de_bruijn_check(const RadialDensity &density, double t,
                              double delta) {
  if (!(delta > 0.0) || !(t > delta))
    throw LabError(ErrorKind::invalid_argument, "need t > delta > 0");
  DeBruijnCheck out;
  out.t = t;
  out.entropy_rate = (gibbs_entropy(heat_flow(density, t + delta)) -
                      gibbs_entropy(heat_flow(density, t - delta))) /
                     (2 * delta);
  out.fisher = fisher_information(heat_flow(density, t));
  out.relative_error = std::abs(out.entropy_rate - out.fisher) / out.fisher;
  return out;
}

double second_moment(const RadialDensity &density) {
  const auto &grid = *density.grid();
  const auto r = grid.nodes();
  const auto rho = density.values();
  std::vector<double> f(rho.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = r[i] * r[i] * rho[i];
  return grid.radial_mass(f);
}

std::vector<double> gaussian_pair_kernel(const RadialGrid &grid,
                                         double width) {
  if (!(width > 0.0))
    throw LabError(ErrorKind::invalid_argument, "kernel width must be > 0");
  const auto r = grid.nodes();
  std::vector<double> u(r.size());
  const double c = std::pow(2.0 * pi * width * width, -1.5);
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = c * std::exp(-r[i] * r[i] / (2.0 * width * width));
  return u;
}

void validate_pair_kernel(const RadialGrid &grid,
                          std::span<const double> kernel) {
  if (kernel.size() != grid.size())
    throw LabError(ErrorKind::grid_mismatch, "kernel table size mismatch");
  for (double v : kernel)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw LabError(ErrorKind::non_repulsive_kernel,
                     "pair kernel must be finite and non-negative");
}

std::vector<double> pair_kernel_potential(const RadialDensity &density,
                                          std::span<const double> kernel) {
  const auto &grid = *density.grid();
  validate_pair_kernel(grid, kernel);
  const KernelPrimitive prim(grid, kernel);
  const auto r = grid.nodes();
  const auto w = grid.weights();
  const auto rho = density.values();
  const std::size_t n = r.size();
  const double range = grid.r_max();

  std::vector<double> m(n);
  for (std::size_t j = 0; j < n; ++j)
    m[j] = w[j] * 4.0 * pi * r[j] * r[j] * rho[j];

  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (m[j] == 0.0)
        continue;
      const double lo = std::abs(r[i] - r[j]);
      if (lo >= range)
        continue;
      const double avg =
          (prim(r[i] + r[j]) - prim(lo)) / (2.0 * r[i] * r[j]);
      s += m[j] * avg;
    }
    out[i] = s;
  }
  return out;
}

double pair_kernel_energy(const RadialDensity &density,
                          std::span<const double> kernel) {
  const auto w = pair_kernel_potential(density, kernel);
  const auto rho = density.values();
  std::vector<double> f(rho.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = w[i] * rho[i];
  return density.grid()->radial_mass(f);
}

EnergyBreakdown trap_energy(const Orbital &orbital, double trap_strength,
                            std::span<const double> kernel) {
  if (!(trap_strength >= 0.0))
    throw LabError(ErrorKind::invalid_argument,
                   "trap strength must be >= 0");
  validate_pair_kernel(*orbital.grid(), kernel);
  const auto rho = RadialDensity::of(orbital);
  const double k = 0.5 * kinetic_K(orbital);
  const double a = trap_strength * second_moment(rho);
  const bool zero_kernel =
      std::all_of(kernel.begin(), kernel.end(), [](double v) { return v == 0.0; });
  const double u = zero_kernel ? 0.0 : 0.5 * pair_kernel_energy(rho, kernel);
  return EnergyBreakdown::of(k, a, u);
}

double oscillator_ground_energy(double trap_strength) {
  return 1.5 * std::sqrt(2.0 * trap_strength);
}

// ---------------------------------------------------------------------------

GaussianSpec::GaussianSpec(Eigen::MatrixXd covariance)
    : covariance_(std::move(covariance)) {
  const auto d = covariance_.rows();
  if (d == 0 || covariance_.cols() != d || d % 3 != 0)
    throw LabError(ErrorKind::invalid_argument,
                   "covariance must be square with dimension 3n");
  if (!covariance_.isApprox(covariance_.transpose(), 1e-14))
    throw LabError(ErrorKind::invalid_argument, "covariance must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  if (llt.info() != Eigen::Success)
    throw LabError(ErrorKind::invalid_argument,
                   "covariance must be positive definite");
}

GaussianSpec GaussianSpec::isotropic(int particles, double variance) {
  if (particles < 1 || !(variance > 0.0))
    throw LabError(ErrorKind::invalid_argument, "bad isotropic Gaussian");
  return GaussianSpec(Eigen::MatrixXd::Identity(3 * particles, 3 * particles) *
                      variance);
}

GaussianSpec GaussianSpec::marginal(int first, int count) const {
  if (first < 0 || count <= 0 || first + count > dimension())
    throw LabError(ErrorKind::invalid_argument, "marginal out of range");
  return GaussianSpec(covariance_.block(first, first, count, count));
}

double fisher_information(const GaussianSpec &spec) {
  return spec.covariance().inverse().trace();
}

double gibbs_entropy(const GaussianSpec &spec) {
  const Eigen::LLT<Eigen::MatrixXd> llt(spec.covariance());
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double d = spec.dimension();
  return 0.5 * (d * std::log(2.0 * pi * std::numbers::e) + log_det);
}

SuperadditivityReport fisher_superadditivity(const GaussianSpec &spec,
                                             int split, double tolerance) {
  const int d = spec.dimension();
  if (split <= 0 || split >= d || split % 3 != 0)
    throw LabError(ErrorKind::invalid_argument,
                   "split must be a positive multiple of 3 below dimension");
  SuperadditivityReport rep;
  rep.joint = fisher_information(spec);
  rep.first = fisher_information(spec.marginal(0, split));
  rep.second = fisher_information(spec.marginal(split, d - split));
  rep.gap = rep.joint - rep.first - rep.second;
  rep.cross_norm =
      spec.covariance().block(0, split, split, d - split).norm();
  const double tol = tolerance * rep.joint;
  rep.superadditive = rep.gap >= -tol;
  rep.monotone = rep.joint >= rep.first - tol && rep.joint >= rep.second - tol;
  rep.equality = std::abs(rep.gap) <= tol;
  return rep;
}

} // namespace hartree_lab
