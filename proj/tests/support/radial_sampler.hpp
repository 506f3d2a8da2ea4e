#pragma once

// Test-side inverse-CDF sampler for radii: piecewise-linear interpolation of
// the cumulative of 4πr²ρ built with a plain trapezoid rule.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace oracle {

class RadialSampler {
public:
  RadialSampler(std::span<const double> r, std::span<const double> rho)
      : r_(r.size() + 1, 0.0), cdf_(r.size() + 1, 0.0) {
    constexpr double pi = std::numbers::pi;
    double prev_r = 0.0, prev_f = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double f = 4 * pi * r[i] * r[i] * rho[i];
      r_[i + 1] = r[i];
      cdf_[i + 1] = cdf_[i] + 0.5 * (f + prev_f) * (r[i] - prev_r);
      prev_r = r[i];
      prev_f = f;
    }
    for (auto &c : cdf_)
      c /= cdf_.back();
  }

  double operator()(std::mt19937_64 &rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto k = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(it - cdf_.begin(), 1, cdf_.size() - 1));
    const double t = (u - cdf_[k - 1]) / (cdf_[k] - cdf_[k - 1]);
    return r_[k - 1] + t * (r_[k] - r_[k - 1]);
  }

private:
  std::vector<double> r_;
  std::vector<double> cdf_;
};

} // namespace oracle
