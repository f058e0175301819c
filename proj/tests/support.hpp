#pragma once

// Shared fixtures for the test suites: random problems, near-identity
// rotations, PSD factorizations, finite differences.

#include <cmath>
#include <functional>

#include "sclab/factorization.hpp"
#include "sclab/lasso.hpp"
#include "sclab/rng.hpp"
#include "sclab/solvers.hpp"

namespace sclab::testing {

struct RandomProblem {
  Dictionary dict;
  std::shared_ptr<const DictOps> ops;
  LassoProblem problem;
  VectorXd z_true;
};

inline RandomProblem random_problem(int n, int m, double lambda, std::uint64_t seed,
                                    double rho = 0.2, double sigma = 1.0) {
  RandomProblem rp;
  rp.dict = sample_gaussian_dictionary(n, m, seed);
  rp.ops = make_dict_ops(rp.dict);
  MatrixXd Z = sample_codes({rho, sigma, m}, 1, derive_seed(seed, 1));
  rp.z_true = Z.col(0);
  rp.problem = build_problem(rp.ops, rp.dict.entries * rp.z_true, lambda);
  return rp;
}

/// Exact orthogonal matrix near the identity: Cayley transform of a small
/// random skew-symmetric matrix (entry scale `eps`).
inline MatrixXd random_rotation_near_identity(int m, double eps, Rng& rng) {
  MatrixXd S(m, m);
  for (int i = 0; i < m; ++i) {
    S(i, i) = 0;
    for (int j = 0; j < i; ++j) {
      double v = eps * rng.normal();
      S(i, j) = v;
      S(j, i) = -v;
    }
  }
  MatrixXd I = MatrixXd::Identity(m, m);
  return (I - 0.5 * S).partialPivLu().solve(I + 0.5 * S);
}

/// Random PSD factorization: orthogonal A near I, S = diag(ABAᵀ) + shift with
/// shift >= margin·‖offdiag(ABAᵀ)‖₂, so AᵀSA − B ⪰ 0.
inline Factorization random_psd_factorization(const MatrixXd& B, double rot_eps, Rng& rng,
                                              double margin_lo = 1.05, double margin_hi = 2.0) {
  const int m = static_cast<int>(B.rows());
  MatrixXd A = random_rotation_near_identity(m, rot_eps, rng);
  MatrixXd M = A * B * A.transpose();
  MatrixXd off = M;
  off.diagonal().setZero();
  double shift = spectral_norm_sym(off) * rng.uniform(margin_lo, margin_hi) + 1e-9;
  VectorXd S = M.diagonal().array() + shift;
  return make_factorization(std::move(A), std::move(S), B);
}

/// Central finite difference of f at 0 with step h.
inline double central_diff(const std::function<double(double)>& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

/// Closed-form LASSO solution for orthonormal D (n = m): h_λ(Dᵀx).
inline VectorXd orthonormal_lasso_solution(const MatrixXd& D, const VectorXd& x, double lambda) {
  return soft_threshold(VectorXd(D.transpose() * x), lambda);
}

}  // namespace sclab::testing
