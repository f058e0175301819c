#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sclab/lasso.hpp"
#include "sclab/solvers.hpp"

namespace sclab {

/// Matrix with column i in E_{δ,i} = {√(1−μ²)e_i + μ h, h ⊥ e_i, ‖h‖=1, μ < δ}.
/// Columns here sit at the boundary μ = δ.
struct EDeltaMatrix {
  MatrixXd A;
  double delta = 0;
  VectorXd mu_per_column;
};

/// Random h per column (uniform on the sphere of e_i^⊥), or caller-supplied
/// directions (columns of h_directions, diagonal entries ignored/zeroed).
EDeltaMatrix sample_e_delta(int K, double delta, std::uint64_t seed,
                            const MatrixXd* h_directions = nullptr);

/// Frobenius-optimal diagonal for fixed A: S_i = A_iᵀ B A_i.
VectorXd optimal_diagonal(const MatrixXd& A, const MatrixXd& B);

/// Column maximizing ‖Du‖₂ over E_{δ,i} to first order:
/// √(1−δ²) e_i + δ (Be_i − e_i)/‖Be_i − e_i‖ (e_i itself when degenerate).
VectorXd greedy_column(const MatrixXd& B, int i, double delta);

/// ‖A⁻¹SA − B‖_F² with the true inverse. Throws on singular A.
double frobenius_residual_inv(const MatrixXd& A, const VectorXd& S, const MatrixXd& B);

/// ‖AᵀSA − B‖_F², the algorithmic residual (A unitary idealization).
double frobenius_residual_transpose(const MatrixXd& A, const VectorXd& S, const MatrixXd& B);

/// ‖AᵀA − I‖_F.
double e_delta_unitarity_check(const EDeltaMatrix& A);

struct MCReport {
  std::string name;
  double estimate = 0;
  double std_error = 0;  // sample std / √trials
  double reference = 0;
  int trials = 0;
  bool within_tolerance = false;
  // reproducibility context
  int K = 0, p = 0;
  double delta = 0;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

std::string mc_reports_to_csv(const std::vector<MCReport>& reports);

/// E_D ‖B‖_F² over generic dictionaries vs the exact K(K−1)/p + K.
MCReport mc_wishart_frobenius(int K, int p, int trials, std::uint64_t seed);

/// Y² = ‖Dᵀd_i‖² − 1. first: E[Y] vs √(2/p)·Γ(K/2)/Γ((K−1)/2);
/// second: E[Y²] vs (K−1)/p (exact).
struct ChiMomentReports {
  MCReport first_moment;
  MCReport second_moment;
};
ChiMomentReports mc_chi_moment(int K, int p, int trials, std::uint64_t seed);

/// Reference value √(2/p)·Γ(K/2)/Γ((K−1)/2).
double chi_moment_reference(int K, int p);

/// E_D ‖AᵀSA − B‖_F² with greedy A and optimal diagonal S, against the
/// first-order expansion K(K−1)/p − 4δ(K−1)√(K/p). within_tolerance allows a
/// C·δ² remainder with C fitted from auxiliary runs at δ/2 and δ.
MCReport mc_lemma1(int K, int p, double delta, int trials, std::uint64_t seed);

/// Paired (common dictionaries) slope of the lemma-1 residual in δ.
struct Lemma1Slope {
  MCReport anchor;       // δ = 0 vs K(K−1)/p
  double slope = 0;      // least-squares slope over the deltas
  double slope_stderr = 0;
  double reference = 0;  // −4(K−1)√(K/p)
  std::vector<double> deltas;
  std::vector<double> means;
  bool within_25pct = false;
};
Lemma1Slope mc_lemma1_slope(int K, int p, int trials, std::uint64_t seed,
                            std::vector<double> deltas = {0.005, 0.01, 0.02});

/// E_{z,D}[‖Az‖₁ − ‖z‖₁] / E‖z‖₁ for A ⊂ E_δ vs δ√(K−1) − δ²/2.
/// code model: iid coordinates z_i = b_i a_i (rho = 1 gives dense Gaussian).
MCReport mc_lemma2(int K, double delta, int trials, const BernoulliGaussianModel& code_model,
                   std::uint64_t seed);

struct GapEstimate {
  double lhs = 0;
  double rhs = 0;
  double margin = 0;  // rhs − lhs
  bool holds = false;
};

struct GapConditionResult {
  GapEstimate theorem_form;  // λ(‖z‖₁ + ‖z*‖₁) ≤ √(K(K−1)/p)·‖z_k − z*‖²
  GapEstimate eq21_form;     // λ‖z‖₁ ≤ √(K(K−1)/p)·‖z_k − z*‖²
  // theorem form with the realized off-diagonal Gram mass ‖offdiag(B)‖_F in
  // place of its generic-ensemble expectation √(K(K−1)/p); filled by
  // gap_trace, which sees B.
  GapEstimate adapted_form;
};

GapConditionResult gap_condition(const VectorXd& z, const VectorXd& z_star, const VectorXd& z_k,
                                 double lambda, int K, int p);

/// √(Σ_{i≠j} B_ij²), the dictionary's own factorization-gain budget.
double offdiagonal_gram_mass(const MatrixXd& B);

/// Runs ISTA from z0 and evaluates the gap condition at every iterate
/// (z := z_k).
std::vector<GapConditionResult> gap_trace(const LassoProblem& p, int K_iters, const VectorXd& z0,
                                          const VectorXd& z_star);
std::vector<GapConditionResult> gap_trace(const LassoProblem& p, int K_iters);

std::string gap_trace_to_csv(const std::vector<GapConditionResult>& trace);

}  // namespace sclab
