#include "hartree_lab/grid.hpp"

#include "hartree_lab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

namespace hartree_lab {

namespace {

constexpr double pi = std::numbers::pi;

// Fornberg's recursion for finite-difference weights of derivative orders
// 0..2 at z over arbitrary nodes x.
template <std::size_t N>
void fornberg(double z, const std::array<double, N> &x,
              std::array<std::array<double, N>, 3> &c) {
  for (auto &row : c)
    row.fill(0.0);
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < N; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 2);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k)
          c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] -
                          c5 * c[k][i - 1]) /
                    c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k)
        c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
}

// Four-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 4> gl_x{-0.8611363115940526, -0.3399810435848563,
                                     0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> gl_w{0.3478548451374538, 0.6521451548625461,
                                     0.6521451548625461, 0.3478548451374538};

// Unit-spaced nodes 0..m-1 at the start of a sum whose remaining weights are
// all 1. Returns weights for the first m nodes chosen as close to 1 as
// possible such that the whole rule integrates polynomials up to `degree`
// exactly from -lead (Gregory-type end correction via Euler-Maclaurin).
std::vector<double> end_correction(std::size_t m, double lead, int degree) {
  constexpr std::array<double, 5> bernoulli{1.0 / 6, -1.0 / 30, 1.0 / 42,
                                            -1.0 / 30, 5.0 / 66};
  const auto mm = static_cast<Eigen::Index>(m);
  const double scale = static_cast<double>(m);
  Eigen::MatrixXd v(degree + 1, mm);
  Eigen::VectorXd rhs(degree + 1);
  for (int k = 0; k <= degree; ++k) {
    for (Eigen::Index j = 0; j < mm; ++j)
      v(k, j) = std::pow(static_cast<double>(j) / scale, k);
    double target = -std::pow(-lead, k + 1) / (k + 1);
    if (k == 0)
      target -= 0.5;
    if (k % 2 == 1)
      target += bernoulli[static_cast<std::size_t>(k / 2)] / (k + 1);
    rhs(k) = target / std::pow(scale, k);
  }
  const Eigen::MatrixXd gram = v * v.transpose();
  const Eigen::VectorXd w =
      Eigen::VectorXd::Ones(mm) + v.transpose() * gram.ldlt().solve(rhs);
  return {w.data(), w.data() + mm};
}

// Weights on unit-spaced nodes t_j = j, as close as possible to 1 while
// integrating polynomials up to `degree` exactly over [-lead, n-1].
std::vector<double> global_rule(std::size_t n, double lead, int degree) {
  const auto nn = static_cast<Eigen::Index>(n);
  const double s = 0.5 * (static_cast<double>(n - 1) + lead);
  const double c = 0.5 * (static_cast<double>(n - 1) - lead);
  Eigen::MatrixXd v(degree + 1, nn);
  Eigen::VectorXd moments(degree + 1);
  for (int k = 0; k <= degree; ++k) {
    for (Eigen::Index j = 0; j < nn; ++j)
      v(k, j) = std::pow((static_cast<double>(j) - c) / s, k);
    moments(k) = k % 2 == 0 ? 2.0 * s / (k + 1) : 0.0;
  }
  const Eigen::VectorXd base = Eigen::VectorXd::Constant(nn, 2.0 * s / n);
  const Eigen::MatrixXd gram = v * v.transpose();
  const Eigen::VectorXd w =
      base + v.transpose() * gram.ldlt().solve(moments - v * base);
  return {w.data(), w.data() + nn};
}

bool all_positive(const std::vector<double> &w) {
  return std::all_of(w.begin(), w.end(), [](double x) { return x > 0.0; });
}

constexpr std::size_t block_size = 20;
constexpr int rule_degree = 7;

// ∫ over [-lead, n-1] of a function sampled on unit-spaced nodes 0..n-1.
std::vector<double> unit_weights(std::size_t n, double lead) {
  for (int degree = rule_degree; degree >= 1; --degree) {
    if (n < 2 * block_size) {
      auto w = global_rule(n, lead, degree);
      if (all_positive(w))
        return w;
      continue;
    }
    auto head = end_correction(block_size, lead, degree);
    auto tail = end_correction(block_size, 0.0, degree);
    if (!all_positive(head) || !all_positive(tail))
      continue;
    std::vector<double> w(n, 1.0);
    for (std::size_t j = 0; j < block_size; ++j) {
      w[j] = head[j];
      w[n - 1 - j] = tail[j];
    }
    return w;
  }
  // Trapezoid with the lead interval folded onto the first node.
  std::vector<double> w(n, 1.0);
  w[0] = 0.5 + lead;
  w[n - 1] = 0.5;
  return w;
}

std::vector<double> uniform_weights(std::size_t n, double h) {
  auto w = unit_weights(n, 1.0);
  for (auto &x : w)
    x *= h;
  return w;
}

// Uniform in s = ln r: ∫ f dr = ∫ f r ds, plus a one-point rule on [0, r_1].
std::vector<double> log_weights(const std::vector<double> &r) {
  const std::size_t n = r.size();
  const double ds = std::log(r[n - 1] / r[0]) / static_cast<double>(n - 1);
  auto w = unit_weights(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    w[j] *= ds * r[j];
  w[0] += r[0];
  return w;
}

} // namespace

std::string_view to_string(GridScheme scheme) {
  return scheme == GridScheme::uniform ? "uniform" : "log-spaced";
}

GridScheme parse_grid_scheme(std::string_view text) {
  if (text == "uniform")
    return GridScheme::uniform;
  if (text == "log-spaced" || text == "log")
    return GridScheme::log_spaced;
  throw LabError(ErrorKind::invalid_argument,
                 "unknown grid scheme '" + std::string(text) + "'");
}

RadialGrid::RadialGrid(GridScheme scheme, std::size_t node_count, double r_max)
    : scheme_(scheme), r_max_(r_max) {
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw LabError(ErrorKind::invalid_argument, "r_max must be > 0");
  if (node_count < min_nodes)
    throw LabError(ErrorKind::invalid_argument,
                   "node_count must be >= 16, got " +
                       std::to_string(node_count));

  const std::size_t n = node_count;
  nodes_.resize(n);
  if (scheme == GridScheme::uniform) {
    const double h = r_max / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      nodes_[i] = h * static_cast<double>(i + 1);
  } else {
    // r_1 = 10^-6 r_max, geometric progression up to r_max.
    const double r_min = 1e-6 * r_max;
    const double ratio = std::log(r_max / r_min) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
      nodes_[i] = r_min * std::exp(ratio * static_cast<double>(i));
  }
  nodes_.back() = r_max;

  // Interval k spans [x_{k-1}, x_k] with x_{-1} = 0, integrated with the
  // degree-5 interpolant through six nearby nodes. On log grids the first
  // interval is far wider than its neighbours and gets a one-point rule.
  intervals_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t start =
        std::min<std::size_t>(k >= 3 ? k - 3 : 0, n - quad_width);
    IntervalRule rule{start, {}};
    rule.coeff.fill(0.0);
    if (k == 0 && scheme == GridScheme::log_spaced) {
      rule.coeff[0] = nodes_[0];
      intervals_[k] = rule;
      continue;
    }
    const double a = k == 0 ? 0.0 : nodes_[k - 1];
    const double b = nodes_[k];
    for (std::size_t q = 0; q < gl_x.size(); ++q) {
      const double x = 0.5 * (a + b) + 0.5 * (b - a) * gl_x[q];
      const double w = 0.5 * (b - a) * gl_w[q];
      for (std::size_t j = 0; j < quad_width; ++j) {
        double l = 1.0;
        const double xj = nodes_[start + j];
        for (std::size_t m = 0; m < quad_width; ++m)
          if (m != j)
            l *= (x - nodes_[start + m]) / (xj - nodes_[start + m]);
        rule.coeff[j] += w * l;
      }
    }
    intervals_[k] = rule;
  }

  weights_ = scheme == GridScheme::uniform ? uniform_weights(n, nodes_[0])
                                           : log_weights(nodes_);

  stencils_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t start =
        std::min<std::size_t>(i >= 3 ? i - 3 : 0, n - stencil_width);
    std::array<double, stencil_width> x{};
    for (std::size_t j = 0; j < stencil_width; ++j)
      x[j] = nodes_[start + j];
    std::array<std::array<double, stencil_width>, 3> c{};
    fornberg(nodes_[i], x, c);
    stencils_[i] = Stencil{start, c[1], c[2]};
  }
}

void RadialGrid::check_size(std::span<const double> f) const {
  if (f.size() != nodes_.size())
    throw LabError(ErrorKind::grid_mismatch,
                   "table of size " + std::to_string(f.size()) +
                       " on grid of size " + std::to_string(nodes_.size()));
}

double RadialGrid::interval_integral(std::size_t k,
                                     std::span<const double> f) const {
  const auto &rule = intervals_[k];
  double s = 0.0;
  for (std::size_t j = 0; j < quad_width; ++j)
    s += rule.coeff[j] * f[rule.start + j];
  return s;
}

double RadialGrid::integrate(std::span<const double> f) const {
  check_size(f);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    s += weights_[i] * f[i];
  return s;
}

std::vector<double> RadialGrid::cumulative(std::span<const double> f) const {
  check_size(f);
  std::vector<double> out(f.size());
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    s += interval_integral(k, f);
    out[k] = s;
  }
  return out;
}

double RadialGrid::radial_mass(std::span<const double> rho) const {
  check_size(rho);
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    s += weights_[i] * 4.0 * pi * nodes_[i] * nodes_[i] * rho[i];
  return s;
}

std::vector<double> RadialGrid::derivative(std::span<const double> f) const {
  check_size(f);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto &st = stencils_[i];
    double s = 0.0;
    for (std::size_t j = 0; j < stencil_width; ++j)
      s += st.d1[j] * f[st.start + j];
    out[i] = s;
  }
  return out;
}

std::vector<double>
RadialGrid::second_derivative(std::span<const double> f) const {
  check_size(f);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto &st = stencils_[i];
    double s = 0.0;
    for (std::size_t j = 0; j < stencil_width; ++j)
      s += st.d2[j] * f[st.start + j];
    out[i] = s;
  }
  return out;
}

std::uint64_t RadialGrid::hash() const noexcept {
  // FNV-1a over the defining parameters.
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(scheme_));
  mix(static_cast<std::uint64_t>(nodes_.size()));
  mix(std::bit_cast<std::uint64_t>(r_max_));
  return h;
}

GridPtr make_grid(GridScheme scheme, std::size_t node_count, double r_max) {
  return std::make_shared<const RadialGrid>(scheme, node_count, r_max);
}

GridPtr default_grid(double lambda) {
  if (!(lambda > 0.0))
    throw LabError(ErrorKind::invalid_argument, "lambda must be > 0");
  return make_grid(GridScheme::uniform, 4000, 40.0 / lambda);
}

void require_same_grid(const RadialGrid &a, const RadialGrid &b) {
  if (!(a == b))
    throw LabError(ErrorKind::grid_mismatch, "objects live on different grids");
}

// ---------------------------------------------------------------------------

Orbital::Orbital(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_)
    throw LabError(ErrorKind::invalid_argument, "null grid");
  if (values_.size() != grid_->size())
    throw LabError(ErrorKind::grid_mismatch, "orbital size mismatch");
}

Orbital Orbital::normalized(GridPtr grid, std::vector<double> values) {
  Orbital u(std::move(grid), std::move(values));
  const double n2 = u.norm_squared();
  if (!(n2 > 0.0) || !std::isfinite(n2))
    throw LabError(ErrorKind::invalid_argument, "orbital has zero norm");
  const double s = 1.0 / std::sqrt(n2);
  for (auto &v : u.values_)
    v *= s;
  return u;
}

double Orbital::norm_squared() const {
  std::vector<double> sq(values_.size());
  for (std::size_t i = 0; i < sq.size(); ++i)
    sq[i] = values_[i] * values_[i];
  return grid_->integrate(sq);
}

std::vector<double> Orbital::phi() const {
  std::vector<double> out(values_.size());
  const auto r = grid_->nodes();
  const double c = 1.0 / std::sqrt(4.0 * pi);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = c * values_[i] / r[i];
  return out;
}

RadialDensity::RadialDensity(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_)
    throw LabError(ErrorKind::invalid_argument, "null grid");
  if (values_.size() != grid_->size())
    throw LabError(ErrorKind::grid_mismatch, "density size mismatch");
  for (double v : values_)
    if (!(v >= 0.0))
      throw LabError(ErrorKind::invalid_argument,
                     "density must be non-negative");
}

RadialDensity RadialDensity::normalized(GridPtr grid,
                                        std::vector<double> values) {
  RadialDensity rho(std::move(grid), std::move(values));
  const double m = rho.mass();
  if (!(m > 0.0) || !std::isfinite(m))
    throw LabError(ErrorKind::invalid_argument, "density has zero mass");
  for (auto &v : rho.values_)
    v /= m;
  return rho;
}

RadialDensity RadialDensity::of(const Orbital &orbital) {
  const auto r = orbital.grid()->nodes();
  const auto u = orbital.values();
  std::vector<double> rho(u.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
    rho[i] = u[i] * u[i] / (4.0 * pi * r[i] * r[i]);
  return RadialDensity(orbital.grid(), std::move(rho));
}

double RadialDensity::mass() const { return grid_->radial_mass(values_); }

Orbital RadialDensity::sqrt_orbital() const {
  const auto r = grid_->nodes();
  std::vector<double> u(values_.size());
  const double c = std::sqrt(4.0 * pi);
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = c * r[i] * std::sqrt(values_[i]);
  return Orbital(grid_, std::move(u));
}

Orbital hydrogenic_orbital(GridPtr grid, double decay) {
  if (!(decay > 0.0))
    throw LabError(ErrorKind::invalid_argument, "decay must be > 0");
  const auto r = grid->nodes();
  std::vector<double> u(r.size());
  const double c = 2.0 * std::pow(decay, 1.5);
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = c * r[i] * std::exp(-decay * r[i]);
  return Orbital(std::move(grid), std::move(u));
}

RadialDensity hydrogenic_density(GridPtr grid, double decay) {
  if (!(decay > 0.0))
    throw LabError(ErrorKind::invalid_argument, "decay must be > 0");
  const auto r = grid->nodes();
  std::vector<double> rho(r.size());
  const double c = decay * decay * decay / pi;
  for (std::size_t i = 0; i < rho.size(); ++i)
    rho[i] = c * std::exp(-2.0 * decay * r[i]);
  return RadialDensity(std::move(grid), std::move(rho));
}

RadialDensity gaussian_density(GridPtr grid, double variance) {
  if (!(variance > 0.0))
    throw LabError(ErrorKind::invalid_argument, "variance must be > 0");
  const auto r = grid->nodes();
  std::vector<double> rho(r.size());
  const double c = std::pow(2.0 * pi * variance, -1.5);
  for (std::size_t i = 0; i < rho.size(); ++i)
    rho[i] = c * std::exp(-r[i] * r[i] / (2.0 * variance));
  return RadialDensity(std::move(grid), std::move(rho));
}

Orbital gaussian_orbital(GridPtr grid, double variance) {
  return gaussian_density(std::move(grid), variance).sqrt_orbital();
}

double l1_distance(const RadialDensity &a, const RadialDensity &b) {
  require_same_grid(*a.grid(), *b.grid());
  const auto va = a.values();
  const auto vb = b.values();
  std::vector<double> d(va.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = std::abs(va[i] - vb[i]);
  return a.grid()->radial_mass(d);
}

double l2_distance(const RadialDensity &a, const RadialDensity &b) {
  require_same_grid(*a.grid(), *b.grid());
  const auto va = a.values();
  const auto vb = b.values();
  std::vector<double> d(va.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = (va[i] - vb[i]) * (va[i] - vb[i]);
  return std::sqrt(std::max(0.0, a.grid()->radial_mass(d)));
}

double outer_mass(const RadialDensity &rho, double outer_fraction) {
  const auto &grid = *rho.grid();
  const auto r = grid.nodes();
  const auto v = rho.values();
  const double cut = outer_fraction * grid.r_max();
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i] >= cut)
      s += grid.weights()[i] * 4.0 * pi * r[i] * r[i] * v[i];
  return std::max(0.0, s);
}

} // namespace hartree_lab
