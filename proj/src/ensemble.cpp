#include "hartree_lab/ensemble.hpp"

#include "hartree_lab/error.hpp"
#include "hartree_lab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace hartree_lab {

namespace {

constexpr double pi = std::numbers::pi;

std::uint32_t mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  return static_cast<std::uint32_t>(p);
}

// Fritsch–Carlson monotone cubic Hermite interpolant on strictly
// increasing abscissae.
class MonotoneCubic {
public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    std::vector<double> delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k)
      delta[k] = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
    m_[0] = delta[0];
    m_[n - 1] = delta[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k)
      m_[k] = delta[k - 1] * delta[k] <= 0.0 ? 0.0 : 0.5 * (delta[k - 1] + delta[k]);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (delta[k] == 0.0) {
        m_[k] = m_[k + 1] = 0.0;
        continue;
      }
      const double a = m_[k] / delta[k], b = m_[k + 1] / delta[k];
      const double s = a * a + b * b;
      if (s > 9.0) {
        const double tau = 3.0 / std::sqrt(s);
        m_[k] = tau * a * delta[k];
        m_[k + 1] = tau * b * delta[k];
      }
    }
  }

  double operator()(double t) const {
    t = std::clamp(t, x_.front(), x_.back());
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    const auto k = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(it - x_.begin() - 1, 0, x_.size() - 2));
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[k] + (s3 - 2 * s2 + s) * h * m_[k] +
           (-2 * s3 + 3 * s2) * y_[k + 1] + (s3 - s2) * h * m_[k + 1];
  }

private:
  std::vector<double> x_, y_, m_;
};

// Monotone cubic inverse of a non-decreasing table starting from (0, 0);
// only strictly increasing abscissae are kept.
std::function<double(double)> monotone_inverse(std::vector<double> x, std::vector<double> y,
                                               double &x_max) {
  std::vector<double> xs{0.0}, ys{0.0};
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > xs.back()) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
  if (xs.size() < 3)
    throw LabError(ErrorKind::invalid_argument, "density too concentrated to sample");
  x_max = xs.back();
  auto spline = std::make_shared<MonotoneCubic>(std::move(xs), std::move(ys));
  return [spline](double u) { return (*spline)(u); };
}

std::vector<double> random_direction(Philox4x32 &rng, int dimension) {
  std::vector<double> v(dimension);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double &x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double &x : v)
    x /= norm;
  return v;
}

std::vector<std::vector<double>> direction_set(int dimension, int count, std::uint64_t seed) {
  Philox4x32 rng(seed, 0x5d1ce, static_cast<std::uint32_t>(dimension));
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(random_direction(rng, dimension));
  return out;
}

std::vector<double> projected(const PointCloud &cloud, const std::vector<double> &theta) {
  std::vector<double> p(cloud.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto q = cloud.point(i);
    double s = 0.0;
    for (int d = 0; d < cloud.dimension; ++d)
      s += q[d] * theta[d];
    p[i] = s;
  }
  std::sort(p.begin(), p.end());
  return p;
}

// W₁ between equal-weight empirical measures on sorted samples, as the
// integral of |Q_a − Q_b| over the merged quantile breakpoints.
double sorted_w1(const std::vector<double> &a, const std::vector<double> &b) {
  const std::uint64_t n = a.size(), m = b.size();
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(m));
  std::uint64_t i = 0, j = 0, at = 0;
  double total = 0.0;
  while (i < n && j < m) {
    const std::uint64_t next_a = (i + 1) * m, next_b = (j + 1) * n;
    const std::uint64_t next = std::min(next_a, next_b);
    total += static_cast<double>(next - at) * scale * std::abs(a[i] - b[j]);
    at = next;
    if (next_a == next)
      ++i;
    if (next_b == next)
      ++j;
  }
  return total;
}

void require_points(const PointCloud &cloud) {
  if (cloud.empty())
    throw LabError(ErrorKind::invalid_argument, "cloud is empty");
}

double quantile_sorted(const std::vector<double> &v, double p) {
  if (v.empty())
    return std::nan("");
  const double h = (v.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

// Quantile function of the 1-D projection of a radial density:
// F(x) = ½ + 2π[∫₀^x r²ρ + x∫_x^∞ rρ] for x ≥ 0.
class ProjectedQuantile {
public:
  explicit ProjectedQuantile(const RadialDensity &density) {
    const auto &grid = *density.grid();
    const auto r = grid.nodes();
    const auto rho = density.values();
    std::vector<double> r2rho(r.size()), rrho(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      r2rho[i] = r[i] * r[i] * rho[i];
      rrho[i] = r[i] * rho[i];
    }
    const auto a = grid.cumulative(r2rho);
    const auto b = grid.cumulative(rrho);
    std::vector<double> g(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      g[i] = a[i] + r[i] * (b.back() - b[i]);
    const double total = 2 * g.back();
    for (double &x : g)
      x /= total;
    inverse_ = monotone_inverse(std::move(g), {r.begin(), r.end()}, g_max_);
  }
  double operator()(double u) const {
    return u >= 0.5 ? inverse_(u - 0.5) : -inverse_(0.5 - u);
  }

private:
  std::function<double(double)> inverse_;
  double g_max_ = 0.5;
};

struct BatteryItem {
  std::string name;
  std::function<double(std::span<const double>)> f;
  std::function<double(double)> radial; // empty for non-radial items
  double exact = 0.0;                   // used when radial is empty
};

double radius_of(std::span<const double> q) {
  return std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
}

std::vector<BatteryItem> battery() {
  auto radial = [](std::string name, std::function<double(double)> g) {
    return BatteryItem{name, [g](std::span<const double> q) { return g(radius_of(q)); }, g, 0.0};
  };
  std::vector<BatteryItem> out;
  out.push_back(radial("1/(1+r)", [](double r) { return 1 / (1 + r); }));
  out.push_back(radial("exp(-r)", [](double r) { return std::exp(-r); }));
  out.push_back(radial("1[r<1]", [](double r) { return r < 1 ? 1.0 : 0.0; }));
  out.push_back(radial("r/(1+r)", [](double r) { return r / (1 + r); }));
  out.push_back(radial("1/(1+r^2)", [](double r) { return 1 / (1 + r * r); }));
  out.push_back(radial("exp(-r^2/4)", [](double r) { return std::exp(-r * r / 4); }));
  out.push_back(radial("1[r<3]", [](double r) { return r < 3 ? 1.0 : 0.0; }));
  out.push_back(radial("cos(r)", [](double r) { return std::cos(r); }));
  out.push_back({"1[z>0]", [](std::span<const double> q) { return q[2] > 0 ? 1.0 : 0.0; }, {}, 0.5});
  out.push_back({"x^2/r^2",
                 [](std::span<const double> q) {
                   const double r2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
                   return r2 > 0 ? q[0] * q[0] / r2 : 1.0 / 3.0;
                 },
                 {},
                 1.0 / 3.0});
  return out;
}

} // namespace

Philox4x32::Counter Philox4x32::block(Counter c, Key k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    std::uint32_t hi0, hi1;
    const std::uint32_t lo0 = mulhilo(0xD2511F53u, c[0], hi0);
    const std::uint32_t lo1 = mulhilo(0xCD9E8D57u, c[2], hi1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

Philox4x32::Philox4x32(std::uint64_t seed, std::uint32_t stream_a, std::uint32_t stream_b)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_a_(stream_a), stream_b_(stream_b) {}

Philox4x32::result_type Philox4x32::operator()() {
  if (used_ >= 4) {
    buffer_ = block({static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32),
                     stream_a_, stream_b_},
                    key_);
    ++index_;
    used_ = 0;
  }
  const std::uint64_t v = buffer_[used_] | (static_cast<std::uint64_t>(buffer_[used_ + 1]) << 32);
  used_ += 2;
  return v;
}

double Philox4x32::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Philox4x32::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  spare_normal_ = rad * std::sin(2 * pi * u2);
  has_spare_ = true;
  return rad * std::cos(2 * pi * u2);
}

RadialSampler::RadialSampler(const RadialDensity &density) {
  const auto &grid = *density.grid();
  const auto r = grid.nodes();
  const auto rho = density.values();
  std::vector<double> f(r.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    f[i] = 4 * pi * r[i] * r[i] * rho[i];
  auto c = grid.cumulative(f);
  const double total = c.back();
  if (!(total > 0.0))
    throw LabError(ErrorKind::invalid_argument, "density has no mass");
  for (double &x : c)
    x /= total;
  inverse_ = monotone_inverse(std::move(c), {r.begin(), r.end()}, u_max_);
  r_max_ = grid.r_max();
}

double RadialSampler::radius(double u) const { return inverse_(u); }

std::array<double, 3> RadialSampler::draw(Philox4x32 &rng) const {
  const double r = radius(rng.uniform());
  const double z = 2 * rng.uniform() - 1;
  const double phi = 2 * pi * rng.uniform();
  const double s = std::sqrt(std::max(0.0, 1 - z * z));
  return {r * s * std::cos(phi), r * s * std::sin(phi), r * z};
}

PointCloud sample_density(const RadialDensity &density, std::size_t n, std::uint64_t seed,
                          std::string source) {
  return sample_density(density, n, seed, static_cast<std::uint32_t>(n), 0, std::move(source));
}

PointCloud sample_density(const RadialDensity &density, std::size_t n, std::uint64_t seed,
                          std::uint32_t stream_a, std::uint32_t stream_b, std::string source) {
  PointCloud cloud{3, {}, seed, std::move(source)};
  if (n == 0)
    return cloud;
  const RadialSampler sampler(density);
  Philox4x32 rng(seed, stream_a, stream_b);
  cloud.coords.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = sampler.draw(rng);
    cloud.coords.insert(cloud.coords.end(), p.begin(), p.end());
  }
  return cloud;
}

UStatistic::UStatistic(const PointCloud &cloud, int order) : cloud_(&cloud), order_(order) {
  if (order < 1)
    throw LabError(ErrorKind::invalid_argument, "order must be >= 1");
  if (static_cast<std::size_t>(order) > cloud.size())
    throw LabError(ErrorKind::order_exceeds_sample,
                   "order " + std::to_string(order) + " exceeds sample size " +
                       std::to_string(cloud.size()));
}

UStatistic u_statistic(const PointCloud &cloud, int order) { return UStatistic(cloud, order); }

double UStatistic::pair(const TestFunction &f) const {
  std::vector<TestFunction> fs(order_, f);
  return pair(fs);
}

double UStatistic::pair(std::span<const TestFunction> factors) const {
  if (factors.size() != static_cast<std::size_t>(order_))
    throw LabError(ErrorKind::invalid_argument, "need one test function per slot");
  const std::size_t n = cloud_->size();
  if (order_ == 1) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      s += factors[0](cloud_->point(k));
    return s / static_cast<double>(n);
  }
  // D[j] after k points is the mean of Π_{i≤j} f_i over ordered j-subsets of
  // the first k points; the integer weights keep constants exact.
  std::vector<double> d(order_ + 1, 0.0), fv(order_);
  d[0] = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto q = cloud_->point(k);
    for (int j = 0; j < order_; ++j)
      fv[j] = factors[j](q);
    const double kk = static_cast<double>(k + 1);
    for (int j = std::min<int>(order_, static_cast<int>(k + 1)); j >= 1; --j)
      d[j] = ((kk - j) * d[j] + j * d[j - 1] * fv[j - 1]) / kk;
  }
  return d[order_];
}

PointCloud pair_cloud(const PointCloud &cloud, std::size_t cap, std::uint64_t seed) {
  if (cloud.dimension != 3)
    throw LabError(ErrorKind::invalid_argument, "pair cloud needs 3-D points");
  const std::size_t n = cloud.size();
  if (n < 2)
    throw LabError(ErrorKind::order_exceeds_sample, "need at least two points for pairs");
  PointCloud out{6, {}, seed, cloud.source + "^2"};
  auto push = [&](std::size_t i, std::size_t j) {
    const auto a = cloud.point(i), b = cloud.point(j);
    out.coords.insert(out.coords.end(), a.begin(), a.end());
    out.coords.insert(out.coords.end(), b.begin(), b.end());
  };
  const std::size_t total = n * (n - 1) / 2;
  if (total <= cap) {
    out.coords.reserve(6 * total);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        push(i, j);
    return out;
  }
  Philox4x32 rng(seed, static_cast<std::uint32_t>(n), 0x9a125);
  out.coords.reserve(6 * cap);
  for (std::size_t s = 0; s < cap; ++s) {
    const auto i = static_cast<std::size_t>(rng.uniform() * n);
    auto j = static_cast<std::size_t>(rng.uniform() * (n - 1));
    if (j >= i)
      ++j;
    push(i, j);
  }
  return out;
}

double kr_distance(const PointCloud &a, const PointCloud &b, int directions, std::uint64_t seed) {
  require_points(a);
  require_points(b);
  if (a.dimension != b.dimension)
    throw LabError(ErrorKind::invalid_argument, "clouds differ in dimension");
  if (directions < 1)
    throw LabError(ErrorKind::invalid_argument, "need at least one direction");
  double total = 0.0;
  for (const auto &theta : direction_set(a.dimension, directions, seed))
    total += sorted_w1(projected(a, theta), projected(b, theta));
  return total / directions;
}

double kr_distance(const RadialDensity &reference, const PointCloud &cloud, int directions,
                   std::uint64_t seed) {
  require_points(cloud);
  if (cloud.dimension % 3 != 0)
    throw LabError(ErrorKind::invalid_argument, "cloud dimension must be a multiple of 3");
  if (directions < 1)
    throw LabError(ErrorKind::invalid_argument, "need at least one direction");
  const std::size_t m = cloud.size();
  if (cloud.dimension == 3) {
    const ProjectedQuantile quantile(reference);
    std::vector<double> ref(m);
    for (std::size_t i = 0; i < m; ++i)
      ref[i] = quantile((i + 0.5) / static_cast<double>(m));
    double total = 0.0;
    for (const auto &theta : direction_set(3, directions, seed))
      total += sorted_w1(projected(cloud, theta), ref);
    return total / directions;
  }
  const int order = cloud.dimension / 3;
  const RadialSampler sampler(reference);
  Philox4x32 rng(seed, static_cast<std::uint32_t>(m), 0x2ef00 + order);
  PointCloud ref{cloud.dimension, {}, seed, "reference"};
  ref.coords.reserve(m * cloud.dimension);
  for (std::size_t i = 0; i < m * order; ++i) {
    const auto p = sampler.draw(rng);
    ref.coords.insert(ref.coords.end(), p.begin(), p.end());
  }
  return kr_distance(ref, cloud, directions, seed);
}

LlnReport lln_experiment(const RadialDensity &density, const std::vector<std::size_t> &n_list,
                         int order, double epsilon, int repetitions, std::uint64_t seed,
                         const LlnOptions &options) {
  if (order != 1 && order != 2)
    throw LabError(ErrorKind::invalid_argument, "order must be 1 or 2");
  if (!(epsilon > 0.0))
    throw LabError(ErrorKind::invalid_argument, "epsilon must be > 0");
  if (repetitions < 1)
    throw LabError(ErrorKind::invalid_argument, "repetitions must be >= 1");
  std::vector<std::size_t> ns = n_list;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  for (auto n : ns)
    if (n < static_cast<std::size_t>(order) || n > 0xffffffffu)
      throw LabError(ErrorKind::order_exceeds_sample, "N must be at least the order");

  LlnReport report{0.0, order, seed, {}};
  for (auto n : ns)
    report.rows.push_back({n, repetitions, epsilon, 0.0, 0.0, 0.0,
                           std::vector<double>(repetitions, 0.0)});
  parallel_for(ns.size() * repetitions, [&](std::size_t task) {
    auto &row = report.rows[task / repetitions];
    const auto rep = static_cast<std::uint32_t>(task % repetitions);
    const auto n = static_cast<std::uint32_t>(row.n);
    auto cloud = sample_density(density, row.n, seed, n, rep, "lln");
    if (order == 2)
      cloud = pair_cloud(cloud, options.pair_cap, seed ^ (static_cast<std::uint64_t>(rep) << 32));
    row.distances[rep] = kr_distance(density, cloud, options.directions, seed);
  });
  for (auto &row : report.rows) {
    std::vector<double> sorted = row.distances;
    std::sort(sorted.begin(), sorted.end());
    const auto over = std::count_if(sorted.begin(), sorted.end(),
                                    [&](double d) { return d > epsilon; });
    row.exceedance = static_cast<double>(over) / repetitions;
    row.median = quantile_sorted(sorted, 0.5);
    row.iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  }
  return report;
}

namespace {

RadialDensity bound_density(double lambda, const SolverOptions &solver) {
  auto res = minimize_hartree_adaptive(lambda, solver);
  if (res.status == SolveStatus::not_bound)
    throw LabError(ErrorKind::not_bound, "no bound Hartree state at lambda = " +
                                             std::to_string(lambda));
  if (res.status == SolveStatus::no_convergence)
    throw LabError(ErrorKind::no_convergence,
                   "Hartree solve did not converge at lambda = " + std::to_string(lambda));
  return RadialDensity::of(res.orbital);
}

} // namespace

LlnReport lln_experiment(double lambda, const std::vector<std::size_t> &n_list, int order,
                         double epsilon, int repetitions, std::uint64_t seed,
                         const SolverOptions &solver, const LlnOptions &options) {
  auto report = lln_experiment(bound_density(lambda, solver), n_list, order, epsilon,
                               repetitions, seed, options);
  report.lambda = lambda;
  return report;
}

double FactorizationEntry::z() const {
  const double diff = std::abs(empirical - expected);
  if (standard_error > 0.0)
    return diff / standard_error;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

FactorizationReport marginal_factorization_check(const RadialDensity &density,
                                                 std::size_t n_points, int order,
                                                 std::uint64_t seed) {
  if (order < 1 || order > 3)
    throw LabError(ErrorKind::invalid_argument, "order must be 1, 2 or 3");
  if (n_points < static_cast<std::size_t>(2 * order))
    throw LabError(ErrorKind::order_exceeds_sample, "sample too small for two blocks");
  const auto cloud = sample_density(density, n_points, seed, "factorization");
  const UStatistic u(cloud, order);
  const auto &grid = *density.grid();
  const auto r = grid.nodes();
  const auto rho = density.values();
  const double mass = grid.radial_mass(rho);

  FactorizationReport report{order, n_points, {}, 0.0};
  for (const auto &item : battery()) {
    double one = item.exact;
    if (item.radial) {
      std::vector<double> g(r.size());
      for (std::size_t i = 0; i < r.size(); ++i)
        g[i] = rho[i] * item.radial(r[i]);
      one = grid.radial_mass(g) / mass;
    }
    // Disjoint blocks give an unbiased estimator whose spread bounds the
    // U-statistic's.
    const std::size_t blocks = n_points / order;
    double s = 0.0, s2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      double p = 1.0;
      for (int j = 0; j < order; ++j)
        p *= item.f(cloud.point(b * order + j));
      s += p;
      s2 += p * p;
    }
    const double mean = s / blocks;
    const double var = std::max(0.0, s2 / blocks - mean * mean);
    FactorizationEntry e{item.name, u.pair(item.f), std::pow(one, order),
                         std::sqrt(var / blocks)};
    report.max_z = std::max(report.max_z, e.z());
    report.entries.push_back(std::move(e));
  }
  return report;
}

FactorizationReport marginal_factorization_check(double lambda, std::size_t n_points,
                                                 int order, std::uint64_t seed,
                                                 const SolverOptions &solver) {
  return marginal_factorization_check(bound_density(lambda, solver), n_points, order, seed);
}

} // namespace hartree_lab
