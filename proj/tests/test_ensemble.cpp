#include "catch_amalgamated.hpp"

#include "hartree_lab/ensemble.hpp"
#include "hartree_lab/error.hpp"
#include "hartree_lab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace hartree_lab;

namespace {

double norm3(std::span<const double> q) {
  return std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
}

PointCloud points(std::vector<std::array<double, 3>> xs) {
  PointCloud c;
  for (const auto &x : xs)
    c.coords.insert(c.coords.end(), x.begin(), x.end());
  return c;
}

const RadialDensity &h1s() {
  static const RadialDensity rho = hydrogenic_density(default_grid(1.0), 1.0);
  return rho;
}

} // namespace

TEST_CASE("philox known answers", "[ensemble][rng]") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) ==
        C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                          {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                          {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("philox streams", "[ensemble][rng]") {
  Philox4x32 a(42), b(42), c(42, 1), d(43);
  std::vector<std::uint64_t> va, vb, vc, vd;
  for (int i = 0; i < 16; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
    vd.push_back(d());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
  Philox4x32 u(7);
  double s = 0, s2 = 0, lo = 1, hi = 0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double x = u.uniform();
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    s += x;
    s2 += x * x;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(s / m - 0.5) < 4 * std::sqrt(1.0 / 12 / m));
  Philox4x32 g(8);
  s = s2 = 0;
  for (int i = 0; i < m; ++i) {
    const double x = g.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / m) < 4 / std::sqrt(double(m)));
  CHECK(std::abs(s2 / m - 1) < 4 * std::sqrt(2.0 / m));
}

TEST_CASE("sampling radial densities", "[ensemble]") {
  SECTION("1s radius moments and distribution") {
    const std::size_t n = 100000;
    auto cloud = sample_density(h1s(), n, 1);
    REQUIRE(cloud.size() == n);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = norm3(cloud.point(i));
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
    CHECK(std::abs(mean - 1.5) < 3 * 0.866 / std::sqrt(double(n)));
    // Kolmogorov–Smirnov against 1 − e^{−2r}(1 + 2r + 2r²), 1% level.
    std::sort(r.begin(), r.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = 1 - std::exp(-2 * r[i]) * (1 + 2 * r[i] + 2 * r[i] * r[i]);
      ks = std::max({ks, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
    }
    CHECK(ks < 1.63 / std::sqrt(double(n)));
    // Isotropy: ⟨z/r⟩ = 0 and ⟨z²/r²⟩ = 1/3.
    double z1 = 0, z2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto q = cloud.point(i);
      const double c = q[2] / norm3(q);
      z1 += c;
      z2 += c * c;
    }
    CHECK(std::abs(z1 / n) < 4 * std::sqrt(1.0 / 3 / n));
    CHECK(std::abs(z2 / n - 1.0 / 3) < 4 * std::sqrt(4.0 / 45 / n));
  }
  SECTION("empty cloud") {
    auto cloud = sample_density(h1s(), 0, 1);
    CHECK(cloud.empty());
    CHECK(cloud.size() == 0);
  }
  SECTION("bit-identical reproduction") {
    auto a = sample_density(h1s(), 1000, 99, "1s");
    auto b = sample_density(h1s(), 1000, 99, "1s");
    auto c = sample_density(h1s(), 1000, 100, "1s");
    CHECK(a.coords == b.coords);
    CHECK(a.coords != c.coords);
    CHECK(a.seed == 99);
    CHECK(a.source == "1s");
  }
  SECTION("hartree minimizer attraction") {
    auto res = minimize_hartree(1.0, default_grid(1.0), {});
    REQUIRE(res.converged);
    const auto rho = RadialDensity::of(res.orbital);
    const std::size_t n = 100000;
    auto cloud = sample_density(rho, n, 3);
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = 1 / norm3(cloud.point(i));
      s += x;
      s2 += x * x;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - attraction_C(rho)) < 3 * se);
  }
}

TEST_CASE("u-statistics", "[ensemble]") {
  auto cloud = sample_density(h1s(), 7, 5);
  const TestFunction one = [](std::span<const double>) { return 1.0; };
  const TestFunction f = [](std::span<const double> q) { return 1 / (1 + norm3(q)); };
  const TestFunction g = [](std::span<const double> q) { return q[0] + 2 * q[2]; };
  const TestFunction h = [](std::span<const double> q) { return std::cos(q[1]); };
  SECTION("normalization and mean") {
    for (int n = 1; n <= 7; ++n)
      CHECK(u_statistic(cloud, n).pair(one) == 1.0);
    double s = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i)
      s += f(cloud.point(i));
    CHECK(u_statistic(cloud, 1).pair(f) == s / 7);
  }
  SECTION("pairs of three points by brute force") {
    auto three = sample_density(h1s(), 3, 6);
    double brute = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        brute += f(three.point(i)) * f(three.point(j));
    CHECK_THAT(u_statistic(three, 2).pair(f), Catch::Matchers::WithinRel(brute / 3, 1e-14));
  }
  SECTION("ordered combinations with distinct factors") {
    std::vector<TestFunction> fs{f, g, h};
    double brute = 0;
    int count = 0;
    for (int i = 0; i < 7; ++i)
      for (int j = i + 1; j < 7; ++j)
        for (int k = j + 1; k < 7; ++k) {
          brute += f(cloud.point(i)) * g(cloud.point(j)) * h(cloud.point(k));
          ++count;
        }
    CHECK(count == 35);
    CHECK_THAT(u_statistic(cloud, 3).pair(fs),
               Catch::Matchers::WithinAbs(brute / count, 1e-13));
  }
  SECTION("full order is the product") {
    double p = 1;
    for (std::size_t i = 0; i < cloud.size(); ++i)
      p *= f(cloud.point(i));
    CHECK_THAT(u_statistic(cloud, 7).pair(f), Catch::Matchers::WithinRel(p, 1e-14));
  }
  SECTION("permutation symmetry") {
    auto shuffled = cloud;
    std::vector<std::size_t> perm{3, 0, 6, 1, 5, 2, 4};
    for (std::size_t i = 0; i < 7; ++i)
      for (int d = 0; d < 3; ++d)
        shuffled.coords[3 * i + d] = cloud.coords[3 * perm[i] + d];
    CHECK_THAT(u_statistic(shuffled, 3).pair(f),
               Catch::Matchers::WithinRel(u_statistic(cloud, 3).pair(f), 1e-13));
  }
  SECTION("order exceeds sample") {
    try {
      u_statistic(cloud, 8);
      FAIL("expected order-exceeds-sample");
    } catch (const LabError &e) {
      CHECK(e.kind() == ErrorKind::order_exceeds_sample);
    }
  }
}

TEST_CASE("pair clouds", "[ensemble]") {
  auto small = sample_density(h1s(), 10, 1);
  auto all = pair_cloud(small, 10000, 1);
  CHECK(all.dimension == 6);
  CHECK(all.size() == 45);
  auto big = sample_density(h1s(), 1000, 1);
  auto capped = pair_cloud(big, 10000, 1);
  CHECK(capped.size() == 10000);
  for (std::size_t i = 0; i < capped.size(); ++i) {
    const auto p = capped.point(i);
    CHECK_FALSE((p[0] == p[3] && p[1] == p[4] && p[2] == p[5]));
  }
}

TEST_CASE("sliced distance", "[ensemble][kr]") {
  auto a = sample_density(h1s(), 500, 1);
  auto b = sample_density(h1s(), 700, 2);
  auto c = sample_density(hydrogenic_density(default_grid(1.0), 0.8), 300, 3);
  SECTION("identity and symmetry") {
    CHECK(kr_distance(a, a) == 0.0);
    CHECK(kr_distance(a, b) == kr_distance(b, a));
    CHECK(kr_distance(a, b) > 0.0);
  }
  SECTION("triangle inequality") {
    for (std::uint64_t seed : {0, 1, 2}) {
      const double ab = kr_distance(a, b, 64, seed), bc = kr_distance(b, c, 64, seed),
                   ac = kr_distance(a, c, 64, seed);
      CHECK(ac <= ab + bc + 1e-12);
      CHECK(ab <= ac + bc + 1e-12);
      CHECK(bc <= ab + ac + 1e-12);
    }
  }
  SECTION("translation of a point") {
    const std::array<double, 3> v{0.3, -1.2, 0.8};
    const double len = std::sqrt(0.09 + 1.44 + 0.64);
    auto x = points({{1.0, 2.0, 3.0}});
    auto y = points({{1.3, 0.8, 3.8}});
    CHECK_THAT(kr_distance(x, y, 512, 4), Catch::Matchers::WithinRel(len / 2, 0.05));
    // Unequal sizes: mass 1/3 moves by v.
    auto x2 = points({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
    auto y2 = points({{0, 0, 0}, {0, 0, 0}, v});
    CHECK_THAT(kr_distance(x2, y2, 512, 4), Catch::Matchers::WithinRel(len / 6, 0.05));
    auto x3 = points({{0, 0, 0}, {0, 0, 0}});
    CHECK_THAT(kr_distance(x3, y2, 512, 4), Catch::Matchers::WithinRel(len / 6, 0.05));
  }
  SECTION("reference density") {
    auto big = sample_density(h1s(), 10000, 11);
    CHECK(kr_distance(h1s(), big) < 0.05);
    // Exact quantile reference agrees with a large independent sample.
    auto huge = sample_density(h1s(), 200000, 12);
    CHECK(std::abs(kr_distance(h1s(), big) - kr_distance(huge, big)) < 0.005);
    int wins = 0;
    for (std::uint32_t rep = 0; rep < 50; ++rep) {
      auto n4 = sample_density(h1s(), 10000, 21, 10000, rep);
      auto n3 = sample_density(h1s(), 1000, 21, 1000, rep);
      wins += kr_distance(h1s(), n4) < kr_distance(h1s(), n3);
    }
    CHECK(wins >= 48);
  }
  SECTION("empty clouds are rejected") {
    PointCloud empty;
    CHECK_THROWS_AS(kr_distance(empty, a), LabError);
    CHECK_THROWS_AS(kr_distance(h1s(), empty), LabError);
  }
}

TEST_CASE("law of large numbers", "[ensemble][lln]") {
  const auto res = minimize_hartree_adaptive(1.0, {});
  REQUIRE(res.bound);
  const auto rho = RadialDensity::of(res.orbital);
  SECTION("first order") {
    auto report = lln_experiment(rho, {256, 1024, 4096}, 1, 0.1, 50, 7);
    REQUIRE(report.rows.size() == 3);
    for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
      CHECK(report.rows[i].n < report.rows[i + 1].n);
      CHECK(report.rows[i + 1].exceedance <= report.rows[i].exceedance);
      CHECK(report.rows[i + 1].median < report.rows[i].median);
    }
    CHECK(report.rows.back().exceedance == 0.0);
    for (const auto &row : report.rows) {
      CHECK(row.exceedance >= 0.0);
      CHECK(row.exceedance <= 1.0);
      CHECK(row.iqr >= 0.0);
    }
    auto again = lln_experiment(rho, {256, 1024, 4096}, 1, 0.1, 50, 7);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(again.rows[i].distances == report.rows[i].distances);
  }
  SECTION("oversized tolerance") {
    auto report = lln_experiment(rho, {16, 64, 256}, 1, 10.0, 10, 3);
    for (const auto &row : report.rows)
      CHECK(row.exceedance == 0.0);
  }
  SECTION("second order") {
    auto report = lln_experiment(rho, {256, 1024}, 2, 0.1, 20, 7);
    CHECK(report.rows[1].median < report.rows[0].median);
  }
  SECTION("trend across seeds") {
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto report = lln_experiment(rho, {256, 4096}, 1, 0.1, 5, seed);
      ok += report.rows[1].median < report.rows[0].median;
    }
    CHECK(ok >= 19);
  }
  SECTION("invalid input") {
    CHECK_THROWS_AS(lln_experiment(rho, {256}, 3, 0.1, 5, 1), LabError);
    CHECK_THROWS_AS(lln_experiment(rho, {1}, 2, 0.1, 5, 1), LabError);
    CHECK_THROWS_AS(lln_experiment(rho, {256}, 1, 0.0, 5, 1), LabError);
  }
}

TEST_CASE("unbound coupling is propagated", "[ensemble][lln]") {
  try {
    lln_experiment(0.5, {64}, 1, 0.1, 2, 1);
    FAIL("expected not-bound");
  } catch (const LabError &e) {
    CHECK(e.kind() == ErrorKind::not_bound);
  }
}

TEST_CASE("marginal factorization", "[ensemble]") {
  const auto res = minimize_hartree_adaptive(1.0, {});
  const auto rho = RadialDensity::of(res.orbital);
  for (int order : {1, 2, 3}) {
    auto report = marginal_factorization_check(rho, 4096, order, 17);
    CHECK(report.entries.size() == 10);
    CHECK(report.ok(4.0));
    for (const auto &e : report.entries)
      CHECK(e.standard_error > 0.0);
  }
  auto pairs = marginal_factorization_check(rho, 4096, 2, 17);
  const auto it = std::find_if(pairs.entries.begin(), pairs.entries.end(),
                               [](const auto &e) { return e.name == "1/(1+r)"; });
  REQUIRE(it != pairs.entries.end());
  CHECK(it->z() <= 4.0);
  auto singles = marginal_factorization_check(rho, 4096, 1, 17);
  const auto ind = std::find_if(singles.entries.begin(), singles.entries.end(),
                                [](const auto &e) { return e.name == "1[r<1]"; });
  REQUIRE(ind != singles.entries.end());
  CHECK(ind->z() <= 4.0);
  CHECK_THROWS_AS(marginal_factorization_check(rho, 4096, 4, 1), LabError);
}
