#pragma once

// Finite-N structure: exact N = 1, the variational two-body problem
// −½Δ₁ − ½Δ₂ − λ/r₁ − λ/r₂ + κ/r₁₂ on symmetric exponential products, and
// the ledger comparing N ↦ (1/N)ℰ^{(N)} across estimate kinds.

#include "hartree_lab/grid.hpp"
#include "hartree_lab/solver.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace hartree_lab {

struct TwoBodyParams {
  double lambda = 1.0;
  double kappa = 0.5;
  void validate() const;
};

enum class TwoBodyFamily { product_exponential, product_exponential_r12 };
std::string to_string(TwoBodyFamily family);
TwoBodyFamily parse_two_body_family(const std::string &text);

/// One symmetrized function e^{−a r₁ − b r₂} r₁₂^k + (1 ↔ 2).
struct TwoBodyFunction {
  double a = 1.0;
  double b = 1.0;
  int r12_power = 0;
};

class TwoBodyBasis {
public:
  /// All pairs a ≤ b from `exponents`, times r₁₂^k for every k of the
  /// family. Exponents must be positive and distinct.
  TwoBodyBasis(TwoBodyFamily family, std::vector<double> exponents);

  /// Geometric exponent grid λ·lo·(hi/lo)^{i/(count−1)}.
  static TwoBodyBasis geometric(TwoBodyFamily family, int count, double lo,
                                double hi, double lambda = 1.0);

  TwoBodyFamily family() const { return family_; }
  const std::vector<double> &exponents() const { return exponents_; }
  const std::vector<int> &r12_powers() const { return r12_powers_; }
  const std::vector<TwoBodyFunction> &functions() const { return functions_; }
  std::size_t size() const { return functions_.size(); }

  /// The same family on the first `count` exponents.
  TwoBodyBasis truncated(std::size_t count) const;

private:
  TwoBodyFamily family_;
  std::vector<double> exponents_;
  std::vector<int> r12_powers_;
  std::vector<TwoBodyFunction> functions_;
};

/// Default correlated basis, six exponents scaled with λ.
TwoBodyBasis default_two_body_basis(double lambda);

struct TwoBodyMatrices {
  Eigen::MatrixXd overlap;
  Eigen::MatrixXd kinetic;    // ½⟨∇Φ_m·∇Φ_n⟩ summed over both particles
  Eigen::MatrixXd attraction; // ⟨1/r₁ + 1/r₂⟩
  Eigen::MatrixXd repulsion;  // ⟨1/r₁₂⟩
};
TwoBodyMatrices two_body_matrices(const TwoBodyBasis &basis);

/// ∫∫ r₁^i r₂^j r₁₂^k e^{−αr₁−βr₂} d³r₁ d³r₂ for i, j, k ≥ −1.
double two_body_integral(int i, int j, int k, double alpha, double beta);

/// A linear combination of basis functions. Energies are Rayleigh quotients,
/// so the coefficients need not be normalized.
struct TwoBodyTrial {
  TwoBodyBasis basis;
  Eigen::VectorXd coefficients;

  /// ψ(s·x) expressed in the dilated basis (exponents times s).
  TwoBodyTrial dilated(double s) const;
};

struct TwoBodyEnergy {
  double kinetic = 0.0;    // ⅛ℱ^{(2)}
  double attraction = 0.0; // −λ⟨1/r₁ + 1/r₂⟩
  double repulsion = 0.0;  // κ⟨1/r₁₂⟩
  double total = 0.0;
  double norm = 0.0; // ⟨ψ|ψ⟩ before normalization
};
TwoBodyEnergy two_body_energy(const TwoBodyTrial &trial,
                              const TwoBodyParams &params);

/// Symmetric orthogonalization with eigenvalue cutoff 1e-12 on the
/// unit-diagonal overlap; any eigenvalue below the cutoff throws
/// basis-degenerate.
inline constexpr double overlap_cutoff = 1e-12;

struct TwoBodyMinimum {
  double energy = 0.0;
  TwoBodyTrial trial;
  double smallest_overlap_eigenvalue = 0.0;
};
TwoBodyMinimum minimize_two_body(const TwoBodyBasis &basis,
                                 const TwoBodyParams &params);

/// ℰ_{λ,κ} = λ²ℰ_{1,κ/λ}: returns (λ², {1, κ/λ}).
struct NormalForm {
  double scale = 1.0;
  TwoBodyParams params;
};
NormalForm normal_form_rescale(const TwoBodyParams &params);

/// −λ²/2, the hydrogenic infimum of ⅛ℱ(ρ) − λ𝒞(√ρ).
double n1_exact(double lambda);

/// ½ℰ^{(2)}_{λ,κ}(ρ⊗ρ) evaluated from one-body functionals.
double product_two_body_energy(const Orbital &orbital, double lambda,
                               double kappa);

/// Relative residual of (1/N)ℰ^{(N)}(ρ^{⊗N}) = ½ℰ^{(2)}_{λ,(N−1)/N}(ρ⊗ρ).
/// The left side is the finite-N Hartree functional, N ≥ 2.
double conditional_decomposition_check(const Orbital &orbital, double lambda,
                                       int n);

enum class LedgerKind { exact, variational_upper, hartree_upper, mean_field_limit };
std::string to_string(LedgerKind kind);

struct LedgerRow {
  std::optional<int> n; // empty for the mean-field limit
  double value = 0.0;
  LedgerKind kind = LedgerKind::exact;
  double error_estimate = 0.0;
};

struct MonotonicityLedger {
  double lambda = 0.0;
  std::vector<LedgerRow> rows;
  bool exact_rows_monotone = true;
  bool n1_below_limit = true;
  bool upper_rows_above_n1 = true;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline constexpr double ledger_tolerance = 1e-8;

MonotonicityLedger monotonicity_ledger(double lambda,
                                       const std::vector<int> &n_list,
                                       const TwoBodyBasis &basis,
                                       const SolverOptions &options = {});

} // namespace hartree_lab
