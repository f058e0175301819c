#pragma once

#include <map>
#include <string>
#include <vector>

#include "sclab/lasso.hpp"

namespace sclab {

/// (A, S) factorization of the Gram kernel, B ≈ AᵀSA, with cached residual
/// R = AᵀSA − B and its smallest eigenvalue. The majorization argument needs
/// R ⪰ 0 (psd_margin >= -1e-10).
struct Factorization {
  MatrixXd A;
  VectorXd S;
  MatrixXd R;
  double psd_margin = 0;
  double unitarity_residual = 0;  // ‖AᵀA − I‖_F

  bool near_unitary() const { return unitarity_residual <= 1e-6; }
  bool psd() const { return psd_margin >= -1e-10; }
};

/// Computes R = AᵀSA − B and its minimum eigenvalue.
std::pair<MatrixXd, double> residual(const MatrixXd& A, const VectorXd& S, const MatrixXd& B);

Factorization make_factorization(MatrixXd A, VectorXd S, const MatrixXd& B);
Factorization identity_factorization(const LassoProblem& p);

/// δ_A(z) = λ(‖Az‖₁ − ‖z‖₁), the ℓ1 commutation error of A.
double delta_A(const MatrixXd& A, const VectorXd& z, double lambda);

/// Subgradient of δ_A at z with the sign(0)=0 convention:
/// λ(Aᵀ sign(Az) − sign(z)).
VectorXd delta_A_subgradient(const MatrixXd& A, const VectorXd& z, double lambda);

/// One factorized proximal step (the shared kernel behind ISTA and FacNet):
///   z⁺ = Aᵀ h_{λ/S}(A z − S⁻¹ A (B z − Dᵀx)).
VectorXd factorized_step(const MatrixXd& B, const VectorXd& dtx, double lambda,
                         const VectorXd& z, const MatrixXd& A, const VectorXd& S);
VectorXd factorized_step(const LassoProblem& p, const VectorXd& z, const Factorization& f);

struct LipschitzBound {
  double sparse = 0;        // λ(√‖z‖₀ + √‖Az‖₀)
  double uniform = 0;       // (1 + ‖A‖₁) λ √m
  double subgrad_norm = 0;  // ‖λ(Aᵀ sign(Az) − sign(z))‖₂
};

LipschitzBound lipschitz_bound(const MatrixXd& A, const VectorXd& z, double lambda);

/// Numeric bound evaluation: lhs = F(z_{k+1}) − F(z*), rhs = the bound, plus a
/// named breakdown of its terms. satisfied ⇔ lhs ≤ rhs + 1e-9.
struct BoundReport {
  double lhs = 0;
  double rhs = 0;
  bool satisfied = false;
  bool psd_ok = true;
  std::map<std::string, double> terms;

  std::string to_json() const;
};

/// Proposition-form check: F(z_{k+1}) − F(z*) ≤ ½‖R‖‖z_k − z*‖² + δ_A(z*) − δ_A(z_{k+1}).
BoundReport prop1_check(const LassoProblem& p, const VectorXd& z_k, const Factorization& f,
                        const VectorXd& z_star);

/// Improvement condition for searching a factorization at z_k:
///   ‖R‖ + 2 L_A(z_{k+1}) / ‖z* − z_k‖ ≤ ‖B‖/2 (sparsity-based L).
struct AccelerationCondition {
  bool holds = false;
  double margin = 0;  // rhs − lhs
  double lhs = 0;
  double rhs = 0;
};

AccelerationCondition acceleration_condition(const Factorization& f, const VectorXd& z_k,
                                             const VectorXd& z_next, const VectorXd& z_star,
                                             const MatrixXd& B, double lambda);

/// k-step bound for a per-iteration schedule of factorizations. The reported
/// rhs is [‖R₀‖‖z*−z₀‖² + 2⟨∂δ_{A₀}(z₁), z*−z₁⟩ + α] / (2k); α and β sums and
/// a strict (non-relaxed) variant are in the terms map.
BoundReport theorem1_bound(const LassoProblem& p, const VectorXd& z0,
                           const std::vector<Factorization>& schedule, const VectorXd& z_star);

/// One factorized step with f0 followed by k−1 plain ISTA steps; rhs is the
/// one-shot corollary bound
///   [(z*−z₀)ᵀR₀(z*−z₀) + 2 L_{A₀}(z₁)(‖z*−z₁‖ + ‖z₁−z₀‖) + (z*−z₁)ᵀR₀(z*−z₁)] / (2k).
BoundReport corollary1_bound(const LassoProblem& p, const VectorXd& z0, const Factorization& f0,
                             int k, const VectorXd& z_star);

/// Triples (z0, z1, z*) as columns; the dataset-adapted factorization objective
/// mean[ ½(z0−z*)ᵀR(z0−z*) + δ_A(z*) − δ_A(z1) ].
struct DatasetTriples {
  MatrixXd Z0;
  MatrixXd Z1;
  MatrixXd Zstar;
};

double dataset_factorization_objective(const Factorization& f, const DatasetTriples& data,
                                       const MatrixXd& B, double lambda);

}  // namespace sclab
