#pragma once

// Sampling the product measure ρ^{⊗N}, empirical U-statistics, sliced
// Wasserstein-1 distances and the law-of-large-numbers experiment.

#include "hartree_lab/grid.hpp"
#include "hartree_lab/solver.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace hartree_lab {

/// Philox4x32-10 counter-based generator. The 64-bit seed is the key; the
/// 128-bit counter holds a 64-bit block index and two 32-bit stream words,
/// so (seed, stream_a, stream_b) selects an independent stream.
class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  using result_type = std::uint64_t;

  static Counter block(Counter counter, Key key);

  explicit Philox4x32(std::uint64_t seed, std::uint32_t stream_a = 0,
                      std::uint32_t stream_b = 0);

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box–Muller.
  double normal();

private:
  Key key_;
  std::uint64_t index_ = 0;
  std::uint32_t stream_a_, stream_b_;
  Counter buffer_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// N points in ℝ^dimension, row-major.
struct PointCloud {
  int dimension = 3;
  std::vector<double> coords;
  std::uint64_t seed = 0;
  std::string source;

  std::size_t size() const { return coords.size() / static_cast<std::size_t>(dimension); }
  bool empty() const { return coords.empty(); }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * dimension, static_cast<std::size_t>(dimension)};
  }
};

/// Inverse-CDF sampler for a radial density: monotone cubic (Fritsch–Carlson)
/// interpolation of r against the cumulative mass of 4πr²ρ.
class RadialSampler {
public:
  explicit RadialSampler(const RadialDensity &density);
  double radius(double u) const;
  /// Radius and uniform direction, three uniforms per point.
  std::array<double, 3> draw(Philox4x32 &rng) const;

private:
  std::function<double(double)> inverse_;
  double u_max_ = 1.0;
  double r_max_ = 0.0;
};

/// N i.i.d. draws from ρ; the stream words default to (N, 0).
PointCloud sample_density(const RadialDensity &density, std::size_t n,
                          std::uint64_t seed, std::string source = "density");
PointCloud sample_density(const RadialDensity &density, std::size_t n,
                          std::uint64_t seed, std::uint32_t stream_a,
                          std::uint32_t stream_b, std::string source = "density");

using TestFunction = std::function<double(std::span<const double>)>;

/// Order-n empirical U-statistic of a cloud, evaluated by pairing with
/// product test functions.
class UStatistic {
public:
  UStatistic(const PointCloud &cloud, int order);
  int order() const { return order_; }
  /// (N choose n)⁻¹ Σ_{k₁<…<k_n} Π_j f_j(Q_{k_j}); a single function is
  /// used in every slot.
  double pair(std::span<const TestFunction> factors) const;
  double pair(const TestFunction &f) const;

private:
  const PointCloud *cloud_;
  int order_;
};
UStatistic u_statistic(const PointCloud &cloud, int order);

/// Unordered pairs (Q_i, Q_j), i ≠ j, as 6-D points: all of them when there
/// are at most `cap`, otherwise `cap` uniform draws.
PointCloud pair_cloud(const PointCloud &cloud, std::size_t cap, std::uint64_t seed);

inline constexpr int default_directions = 64;

/// Sliced W₁: mean over `directions` seeded unit directions of the 1-D W₁
/// between the projected samples.
double kr_distance(const PointCloud &a, const PointCloud &b,
                   int directions = default_directions, std::uint64_t seed = 0);

/// Sliced W₁ against ρ^{⊗order}. For order 1 the projection of a radial
/// density is direction-independent and is represented by |cloud| exact
/// quantiles; for higher orders by an independent reference sample of
/// |cloud| points drawn from its own stream.
double kr_distance(const RadialDensity &reference, const PointCloud &cloud,
                   int directions = default_directions, std::uint64_t seed = 0);

struct LlnRow {
  std::size_t n = 0;
  int repetitions = 0;
  double epsilon = 0.0;
  double exceedance = 0.0;
  double median = 0.0;
  double iqr = 0.0;
  std::vector<double> distances;
};

struct LlnReport {
  double lambda = 0.0;
  int order = 1;
  std::uint64_t seed = 0;
  std::vector<LlnRow> rows;
};

struct LlnOptions {
  int directions = default_directions;
  std::size_t pair_cap = 10000;
};

/// Throws not-bound if the Hartree minimizer at λ is not a bound state.
LlnReport lln_experiment(double lambda, const std::vector<std::size_t> &n_list,
                         int order, double epsilon, int repetitions, std::uint64_t seed,
                         const SolverOptions &solver = {}, const LlnOptions &options = {});
/// Same experiment on a given density.
LlnReport lln_experiment(const RadialDensity &density, const std::vector<std::size_t> &n_list,
                         int order, double epsilon, int repetitions, std::uint64_t seed,
                         const LlnOptions &options = {});

struct FactorizationEntry {
  std::string name;
  double empirical = 0.0;
  double expected = 0.0;
  double standard_error = 0.0;
  double z() const;
};

struct FactorizationReport {
  int order = 1;
  std::size_t sample_size = 0;
  std::vector<FactorizationEntry> entries;
  double max_z = 0.0;
  bool ok(double z_limit = 4.0) const { return max_z <= z_limit; }
};

/// Empirical order-n product moments of ρ^{⊗N} samples against products of
/// quadrature moments, over a battery of ten bounded radial test functions.
/// Standard errors come from disjoint n-blocks of the cloud.
FactorizationReport marginal_factorization_check(const RadialDensity &density,
                                                 std::size_t n_points, int order,
                                                 std::uint64_t seed);
FactorizationReport marginal_factorization_check(double lambda, std::size_t n_points,
                                                 int order, std::uint64_t seed,
                                                 const SolverOptions &solver = {});

} // namespace hartree_lab
