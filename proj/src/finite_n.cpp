#include "hartree_lab/finite_n.hpp"

#include "hartree_lab/error.hpp"
#include "hartree_lab/functionals.hpp"
#include "hartree_lab/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace hartree_lab {

namespace {

constexpr double pi = std::numbers::pi;

double factorial(int n) { return std::tgamma(n + 1.0); }

double binomial(int n, int k) {
  return factorial(n) / (factorial(k) * factorial(n - k));
}

// ∫₀^∞ dx x^p e^{−αx} ∫₀^x y^q e^{−βy} dy, summed as the positive series
// q! Σ_{m>q} β^{m−q−1} (p+m)! / (m! (α+β)^{p+m+1}).
double ordered_moment(int p, int q, double alpha, double beta) {
  const double s = alpha + beta;
  double term = factorial(p + q + 1) / ((q + 1) * std::pow(s, p + q + 2));
  double sum = 0.0;
  for (int m = q + 1; m < 100000; ++m) {
    sum += term;
    if (term < 1e-18 * sum)
      break;
    term *= beta * (p + m + 1) / ((m + 1) * s);
  }
  return sum;
}

// c · r₁^i r₂^j r₁₂^k, sharing the exponential of the primitive it acts on.
struct Monomial {
  double c;
  int i, j, k;
};

// −½(Δ₁ + Δ₂) applied to e^{−a r₁ − b r₂} r₁₂^k, k ∈ {0, 1}, in Hylleraas
// coordinates.
std::vector<Monomial> kinetic_action(double a, double b, int k) {
  std::vector<Monomial> out;
  auto add = [&](double c, int i, int j, int kk) { out.push_back({-0.5 * c, i, j, kk}); };
  add(a * a + b * b, 0, 0, k);
  add(-2 * a, -1, 0, k);
  add(-2 * b, 0, -1, k);
  if (k == 1) {
    add(4.0, 0, 0, -1);
    add(-a, 1, 0, -1);
    add(a, -1, 2, -1);
    add(-a, -1, 0, 1);
    add(-b, 0, 1, -1);
    add(b, 2, -1, -1);
    add(-b, 0, -1, 1);
  }
  return out;
}

struct Primitive {
  double a, b;
  int k;
};

struct PrimitiveElements {
  double overlap, kinetic, attraction, repulsion;
};

PrimitiveElements primitive_elements(const Primitive &bra, const Primitive &ket) {
  const double alpha = bra.a + ket.a;
  const double beta = bra.b + ket.b;
  const int k = bra.k + ket.k;
  PrimitiveElements e{};
  e.overlap = two_body_integral(0, 0, k, alpha, beta);
  e.attraction = two_body_integral(-1, 0, k, alpha, beta) +
                 two_body_integral(0, -1, k, alpha, beta);
  e.repulsion = two_body_integral(0, 0, k - 1, alpha, beta);
  for (const auto &m : kinetic_action(ket.a, ket.b, ket.k))
    e.kinetic += m.c * two_body_integral(m.i, m.j, m.k + bra.k, alpha, beta);
  return e;
}

} // namespace

void TwoBodyParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw LabError(ErrorKind::invalid_argument, "lambda must be > 0");
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw LabError(ErrorKind::invalid_argument, "kappa must be >= 0");
}

std::string to_string(TwoBodyFamily family) {
  return family == TwoBodyFamily::product_exponential ? "product-exponential"
                                                      : "product-exponential-plus-r12";
}

TwoBodyFamily parse_two_body_family(const std::string &text) {
  if (text == "product-exponential")
    return TwoBodyFamily::product_exponential;
  if (text == "product-exponential-plus-r12")
    return TwoBodyFamily::product_exponential_r12;
  throw LabError(ErrorKind::invalid_argument, "unknown two-body family: " + text);
}

std::string to_string(LedgerKind kind) {
  switch (kind) {
  case LedgerKind::exact: return "exact";
  case LedgerKind::variational_upper: return "variational-upper";
  case LedgerKind::hartree_upper: return "hartree-upper";
  case LedgerKind::mean_field_limit: return "mean-field-limit";
  }
  return "exact";
}

double two_body_integral(int i, int j, int k, double alpha, double beta) {
  if (i < -1 || j < -1 || k < -1)
    throw LabError(ErrorKind::invalid_argument, "powers must be >= -1");
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw LabError(ErrorKind::invalid_argument, "exponents must be > 0");
  // Angular average of r₁₂^k: [(r₁+r₂)^m − |r₁−r₂|^m] / (m r₁ r₂), m = k+2,
  // which expands to 2 Σ_{m−l odd} C(m,l) big^l small^{m−l}.
  const int m = k + 2;
  double sum = 0.0;
  for (int l = 0; l <= m; ++l) {
    if ((m - l) % 2 == 0)
      continue;
    const double c = binomial(m, l);
    sum += c * (ordered_moment(i + 1 + l, j + 1 + m - l, alpha, beta) +
                ordered_moment(j + 1 + l, i + 1 + m - l, beta, alpha));
  }
  return 16.0 * pi * pi * sum / m;
}

TwoBodyBasis::TwoBodyBasis(TwoBodyFamily family, std::vector<double> exponents)
    : family_(family), exponents_(std::move(exponents)) {
  if (exponents_.empty())
    throw LabError(ErrorKind::invalid_argument, "basis needs at least one exponent");
  std::set<double> seen;
  for (double a : exponents_) {
    if (!(a > 0.0) || !std::isfinite(a))
      throw LabError(ErrorKind::invalid_argument, "exponents must be positive");
    if (!seen.insert(a).second)
      throw LabError(ErrorKind::basis_degenerate, "repeated exponent in basis");
  }
  r12_powers_ = family_ == TwoBodyFamily::product_exponential ? std::vector<int>{0}
                                                              : std::vector<int>{0, 1};
  for (int k : r12_powers_)
    for (std::size_t p = 0; p < exponents_.size(); ++p)
      for (std::size_t q = p; q < exponents_.size(); ++q)
        functions_.push_back({exponents_[p], exponents_[q], k});
}

TwoBodyBasis TwoBodyBasis::geometric(TwoBodyFamily family, int count, double lo,
                                     double hi, double lambda) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo) || !(lambda > 0.0))
    throw LabError(ErrorKind::invalid_argument, "bad geometric exponent grid");
  std::vector<double> e(count);
  for (int i = 0; i < count; ++i)
    e[i] = lambda * lo * (count == 1 ? 1.0 : std::pow(hi / lo, double(i) / (count - 1)));
  return TwoBodyBasis(family, std::move(e));
}

TwoBodyBasis TwoBodyBasis::truncated(std::size_t count) const {
  if (count < 1 || count > exponents_.size())
    throw LabError(ErrorKind::invalid_argument, "bad truncation size");
  return TwoBodyBasis(family_, {exponents_.begin(), exponents_.begin() + count});
}

TwoBodyBasis default_two_body_basis(double lambda) {
  return TwoBodyBasis::geometric(TwoBodyFamily::product_exponential_r12, 6, 0.4,
                                 4.0, lambda);
}

TwoBodyMatrices two_body_matrices(const TwoBodyBasis &basis) {
  const auto &fs = basis.functions();
  const auto n = static_cast<Eigen::Index>(fs.size());
  TwoBodyMatrices out{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n),
                      Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c <= r; ++c) {
      const auto &f = fs[r];
      const auto &g = fs[c];
      PrimitiveElements sum{};
      for (const Primitive &bra : {Primitive{f.a, f.b, f.r12_power},
                                   Primitive{f.b, f.a, f.r12_power}})
        for (const Primitive &ket : {Primitive{g.a, g.b, g.r12_power},
                                     Primitive{g.b, g.a, g.r12_power}}) {
          const auto e = primitive_elements(bra, ket);
          const auto e2 = primitive_elements(ket, bra);
          sum.overlap += e.overlap;
          sum.kinetic += 0.5 * (e.kinetic + e2.kinetic);
          sum.attraction += e.attraction;
          sum.repulsion += e.repulsion;
        }
      out.overlap(r, c) = out.overlap(c, r) = sum.overlap;
      out.kinetic(r, c) = out.kinetic(c, r) = sum.kinetic;
      out.attraction(r, c) = out.attraction(c, r) = sum.attraction;
      out.repulsion(r, c) = out.repulsion(c, r) = sum.repulsion;
    }
  }
  return out;
}

TwoBodyTrial TwoBodyTrial::dilated(double s) const {
  if (!(s > 0.0))
    throw LabError(ErrorKind::invalid_argument, "dilation must be > 0");
  std::vector<double> e = basis.exponents();
  for (double &a : e)
    a *= s;
  TwoBodyTrial out{TwoBodyBasis(basis.family(), std::move(e)), coefficients};
  const auto &fs = out.basis.functions();
  for (std::size_t i = 0; i < fs.size(); ++i)
    out.coefficients[static_cast<Eigen::Index>(i)] *= std::pow(s, fs[i].r12_power);
  return out;
}

TwoBodyEnergy two_body_energy(const TwoBodyTrial &trial, const TwoBodyParams &params) {
  params.validate();
  if (static_cast<std::size_t>(trial.coefficients.size()) != trial.basis.size())
    throw LabError(ErrorKind::invalid_argument, "coefficient count does not match basis");
  const auto m = two_body_matrices(trial.basis);
  const auto &c = trial.coefficients;
  TwoBodyEnergy e;
  e.norm = c.dot(m.overlap * c);
  if (!(e.norm > 0.0))
    throw LabError(ErrorKind::invalid_argument, "trial has zero norm");
  e.kinetic = c.dot(m.kinetic * c) / e.norm;
  e.attraction = -params.lambda * c.dot(m.attraction * c) / e.norm;
  e.repulsion = params.kappa * c.dot(m.repulsion * c) / e.norm;
  e.total = e.kinetic + e.attraction + e.repulsion;
  return e;
}

TwoBodyMinimum minimize_two_body(const TwoBodyBasis &basis, const TwoBodyParams &params) {
  params.validate();
  const auto m = two_body_matrices(basis);
  const Eigen::VectorXd d = m.overlap.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd s = d.asDiagonal() * m.overlap * d.asDiagonal();
  const Eigen::MatrixXd h =
      d.asDiagonal() *
      (m.kinetic - params.lambda * m.attraction + params.kappa * m.repulsion) *
      d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> overlap_eig(s);
  const double smallest = overlap_eig.eigenvalues().minCoeff();
  if (!(smallest > overlap_cutoff))
    throw LabError(ErrorKind::basis_degenerate,
                   "overlap eigenvalue " + std::to_string(smallest) + " below cutoff");
  const Eigen::MatrixXd x = overlap_eig.eigenvectors() *
                            overlap_eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
  const Eigen::MatrixXd hx = x.transpose() * h * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (hx + hx.transpose()));
  Eigen::VectorXd c = d.asDiagonal() * (x * eig.eigenvectors().col(0));
  c /= std::sqrt(c.dot(m.overlap * c));
  return {eig.eigenvalues()[0], TwoBodyTrial{basis, std::move(c)}, smallest};
}

NormalForm normal_form_rescale(const TwoBodyParams &params) {
  params.validate();
  return {params.lambda * params.lambda, {1.0, params.kappa / params.lambda}};
}

double n1_exact(double lambda) {
  if (!(lambda > 0.0))
    throw LabError(ErrorKind::invalid_argument, "lambda must be > 0");
  return -0.5 * lambda * lambda;
}

double product_two_body_energy(const Orbital &orbital, double lambda, double kappa) {
  const auto rho = RadialDensity::of(orbital);
  // ⅛ℱ(ρ⊗ρ) = ¼ℱ(ρ) = 𝒦(√ρ).
  const double kinetic = kinetic_K(orbital);
  return 0.5 * (kinetic - 2 * lambda * attraction_C(rho) + kappa * repulsion_I(rho, rho));
}

double conditional_decomposition_check(const Orbital &orbital, double lambda, int n) {
  if (n < 2)
    throw LabError(ErrorKind::invalid_argument, "N must be >= 2");
  const double nn = n;
  const double lhs = finite_n_hartree(orbital, lambda, n).total() / (nn * nn * nn);
  const double rhs = product_two_body_energy(orbital, lambda, (nn - 1) / nn);
  return std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
}

MonotonicityLedger monotonicity_ledger(double lambda, const std::vector<int> &n_list,
                                       const TwoBodyBasis &basis,
                                       const SolverOptions &options) {
  if (!(lambda >= 0.9))
    throw LabError(ErrorKind::invalid_argument, "ledger needs lambda >= 0.9");
  std::vector<int> ns = n_list;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.empty() || ns.front() < 1)
    throw LabError(ErrorKind::invalid_argument, "N list must hold positive integers");

  const bool want_two = std::binary_search(ns.begin(), ns.end(), 2);
  std::optional<HartreeResult> hartree;
  double two_body = 0.0, two_body_error = 0.0;
  parallel_for(2, [&](std::size_t task) {
    if (task == 0) {
      hartree.emplace(minimize_hartree_adaptive(lambda, options));
    } else if (want_two) {
      const TwoBodyParams params{lambda, 0.5};
      two_body = minimize_two_body(basis, params).energy;
      if (basis.exponents().size() > 1) {
        const auto smaller = basis.truncated(basis.exponents().size() - 1);
        two_body_error = 0.5 * std::abs(two_body - minimize_two_body(smaller, params).energy);
      }
    }
  });

  MonotonicityLedger ledger;
  ledger.lambda = lambda;
  const double exact = n1_exact(lambda);
  for (int n : ns) {
    if (n == 1) {
      ledger.rows.push_back({1, exact, LedgerKind::exact, 0.0});
    } else if (n == 2) {
      ledger.rows.push_back({2, 0.5 * two_body, LedgerKind::variational_upper, two_body_error});
    } else {
      const double nn = n;
      const double v = finite_n_hartree(hartree->orbital, lambda, n).total() / (nn * nn * nn);
      ledger.rows.push_back({n, v, LedgerKind::hartree_upper, 0.0});
    }
  }
  ledger.rows.push_back({std::nullopt, hartree->energy, LedgerKind::mean_field_limit,
                         hartree->residual});

  std::optional<LedgerRow> last_exact;
  for (const auto &row : ledger.rows) {
    if (row.kind != LedgerKind::exact)
      continue;
    if (last_exact && row.value < last_exact->value - ledger_tolerance) {
      ledger.exact_rows_monotone = false;
      ledger.violations.push_back("exact rows decrease at N = " + std::to_string(*row.n));
    }
    last_exact = row;
  }
  if (!hartree->converged || !hartree->bound)
    ledger.violations.push_back("mean-field limit did not converge to a bound state");
  if (exact > hartree->energy + ledger_tolerance) {
    ledger.n1_below_limit = false;
    ledger.violations.push_back("N = 1 exact row lies above the mean-field limit");
  }
  for (const auto &row : ledger.rows) {
    const bool upper = row.kind == LedgerKind::variational_upper ||
                       row.kind == LedgerKind::hartree_upper;
    if (upper && row.value < exact - ledger_tolerance) {
      ledger.upper_rows_above_n1 = false;
      ledger.violations.push_back("upper bound at N = " + std::to_string(*row.n) +
                                  " undercuts the N = 1 exact row");
    }
  }
  return ledger;
}

} // namespace hartree_lab
