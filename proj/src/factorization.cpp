#include "sclab/factorization.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sclab/matrix_io.hpp"

namespace sclab {

std::pair<MatrixXd, double> residual(const MatrixXd& A, const VectorXd& S, const MatrixXd& B) {
  if (A.rows() != A.cols() || A.rows() != B.rows() || S.size() != A.rows())
    throw std::invalid_argument("residual: dimension mismatch");
  MatrixXd R = A.transpose() * S.asDiagonal() * A - B;
  return {R, min_eigenvalue_sym(R)};
}

Factorization make_factorization(MatrixXd A, VectorXd S, const MatrixXd& B) {
  if ((S.array() <= 0).any()) throw std::invalid_argument("factorization: S entries must be > 0");
  auto [R, margin] = residual(A, S, B);
  double asym = (R - R.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) throw std::runtime_error("factorization residual not symmetric");
  Factorization f;
  f.unitarity_residual = (A.transpose() * A - MatrixXd::Identity(A.rows(), A.cols())).norm();
  f.A = std::move(A);
  f.S = std::move(S);
  f.R = std::move(R);
  f.psd_margin = margin;
  return f;
}

Factorization identity_factorization(const LassoProblem& p) {
  Eigen::Index m = p.m();
  return make_factorization(MatrixXd::Identity(m, m), VectorXd::Constant(m, p.L()), p.B());
}

double delta_A(const MatrixXd& A, const VectorXd& z, double lambda) {
  if (A.cols() != z.size()) throw std::invalid_argument("delta_A: dimension mismatch");
  return lambda * ((A * z).lpNorm<1>() - z.lpNorm<1>());
}

VectorXd delta_A_subgradient(const MatrixXd& A, const VectorXd& z, double lambda) {
  return lambda * (A.transpose() * sign_vector(A * z) - sign_vector(z));
}

VectorXd factorized_step(const MatrixXd& B, const VectorXd& dtx, double lambda,
                         const VectorXd& z, const MatrixXd& A, const VectorXd& S) {
  VectorXd grad = B * z - dtx;
  VectorXd u = A * z - (A * grad).cwiseQuotient(S);
  VectorXd thr = (lambda / S.array()).matrix();
  return A.transpose() * soft_threshold(u, thr);
}

VectorXd factorized_step(const LassoProblem& p, const VectorXd& z, const Factorization& f) {
  if ((f.S.array() <= 0).any()) throw std::invalid_argument("factorized_step: S entries must be > 0");
  return factorized_step(p.B(), p.dtx, p.lambda, z, f.A, f.S);
}

LipschitzBound lipschitz_bound(const MatrixXd& A, const VectorXd& z, double lambda) {
  LipschitzBound b;
  VectorXd az = A * z;
  b.sparse = lambda * (std::sqrt(double(support_size(z))) + std::sqrt(double(support_size(az))));
  double a1 = A.cwiseAbs().colwise().sum().maxCoeff();
  b.uniform = (1.0 + a1) * lambda * std::sqrt(double(z.size()));
  b.subgrad_norm = (lambda * (A.transpose() * sign_vector(az) - sign_vector(z))).norm();
  return b;
}

std::string BoundReport::to_json() const {
  nlohmann::json j;
  j["lhs"] = lhs;
  j["rhs"] = rhs;
  j["satisfied"] = satisfied;
  j["psd_ok"] = psd_ok;
  j["terms"] = terms;
  return j.dump(2);
}

BoundReport prop1_check(const LassoProblem& p, const VectorXd& z_k, const Factorization& f,
                        const VectorXd& z_star) {
  BoundReport r;
  r.psd_ok = f.psd();
  VectorXd z_next = factorized_step(p, z_k, f);
  double rnorm = spectral_norm_sym(f.R);
  double d_star = delta_A(f.A, z_star, p.lambda);
  double d_next = delta_A(f.A, z_next, p.lambda);
  r.lhs = lasso_cost(p, z_next) - lasso_cost(p, z_star);
  r.rhs = 0.5 * rnorm * (z_k - z_star).squaredNorm() + d_star - d_next;
  r.satisfied = r.lhs <= r.rhs + 1e-9;
  r.terms = {{"residual_norm", rnorm},
             {"residual_quadratic", 0.5 * rnorm * (z_k - z_star).squaredNorm()},
             {"delta_zstar", d_star},
             {"delta_znext", d_next},
             {"psd_margin", f.psd_margin}};
  return r;
}

AccelerationCondition acceleration_condition(const Factorization& f, const VectorXd& z_k,
                                             const VectorXd& z_next, const VectorXd& z_star,
                                             const MatrixXd& B, double lambda) {
  AccelerationCondition c;
  double lip = lipschitz_bound(f.A, z_next, lambda).sparse;
  double dist = (z_star - z_k).norm();
  double lip_term;
  if (lip == 0.0)
    lip_term = 0.0;
  else if (dist == 0.0)
    lip_term = std::numeric_limits<double>::infinity();
  else
    lip_term = 2.0 * lip / dist;
  c.lhs = spectral_norm_sym(f.R) + lip_term;
  c.rhs = 0.5 * spectral_norm_sym(B);
  c.margin = c.rhs - c.lhs;
  c.holds = c.lhs <= c.rhs;
  return c;
}

BoundReport theorem1_bound(const LassoProblem& p, const VectorXd& z0,
                           const std::vector<Factorization>& schedule, const VectorXd& z_star) {
  if (schedule.empty()) throw std::invalid_argument("theorem1_bound: empty schedule");
  const int k = static_cast<int>(schedule.size());
  BoundReport r;

  std::vector<VectorXd> z(k + 1);
  z[0] = z0;
  for (int i = 0; i < k; ++i) {
    if (!schedule[i].psd()) r.psd_ok = false;
    z[i + 1] = factorized_step(p, z[i], schedule[i]);
  }

  // per-step subgradient inner products <∂δ_{A_i}(z_{i+1}), z* − z_{i+1}>
  std::vector<double> lip_sub(k), lip_sparse(k);
  for (int i = 0; i < k; ++i) {
    VectorXd g = delta_A_subgradient(schedule[i].A, z[i + 1], p.lambda);
    lip_sub[i] = g.dot(z_star - z[i + 1]);
    lip_sparse[i] =
        lipschitz_bound(schedule[i].A, z[i + 1], p.lambda).sparse * (z_star - z[i + 1]).norm();
  }

  double alpha = 0, alpha_sparse = 0;
  for (int i = 1; i < k; ++i) {
    VectorXd v = z_star - z[i];
    double rq = v.dot((schedule[i].R - schedule[i - 1].R) * v);
    alpha += 2.0 * lip_sub[i] + rq;
    alpha_sparse += 2.0 * lip_sparse[i] + rq;
  }

  double beta = 0, beta_strict = 0;
  for (int i = 0; i < k; ++i) {
    VectorXd step = z[i + 1] - z[i];
    double w = step.dot(schedule[i].R * step) + 2.0 * delta_A(schedule[i].A, z[i + 1], p.lambda) -
               2.0 * delta_A(schedule[i].A, z[i], p.lambda);
    beta += (i + 1) * w;
    beta_strict += i * w;
  }

  double r0_norm = spectral_norm_sym(schedule[0].R);
  double quad0_norm = r0_norm * (z_star - z0).squaredNorm();
  double quad0_exact = (z_star - z0).dot(schedule[0].R * (z_star - z0));

  r.lhs = lasso_cost(p, z[k]) - lasso_cost(p, z_star);
  r.rhs = (quad0_norm + 2.0 * lip_sub[0] + alpha) / (2.0 * k);
  r.satisfied = r.lhs <= r.rhs + 1e-9;
  r.terms = {{"k", double(k)},
             {"residual_quadratic_norm", quad0_norm},
             {"residual_quadratic_exact", quad0_exact},
             {"lipschitz_subgrad_0", lip_sub[0]},
             {"lipschitz_sparse_0", lip_sparse[0]},
             {"alpha", alpha},
             {"alpha_sparse", alpha_sparse},
             {"beta", beta},
             {"beta_strict", beta_strict},
             {"rhs_strict", (quad0_exact + 2.0 * lip_sub[0] + alpha - beta_strict) / (2.0 * k)}};
  return r;
}

BoundReport corollary1_bound(const LassoProblem& p, const VectorXd& z0, const Factorization& f0,
                             int k, const VectorXd& z_star) {
  if (k < 1) throw std::invalid_argument("corollary1_bound: k must be >= 1");
  BoundReport r;
  r.psd_ok = f0.psd();

  VectorXd z1 = factorized_step(p, z0, f0);
  VectorXd zk = z1;
  Factorization id = identity_factorization(p);
  for (int i = 1; i < k; ++i) zk = factorized_step(p, zk, id);

  LipschitzBound lb = lipschitz_bound(f0.A, z1, p.lambda);
  double lip0 = lb.subgrad_norm;
  VectorXd v0 = z_star - z0, v1 = z_star - z1;
  double quad0 = v0.dot(f0.R * v0);
  double quad1 = v1.dot(f0.R * v1);
  double lip_term = 2.0 * lip0 * (v1.norm() + (z1 - z0).norm());

  r.lhs = lasso_cost(p, zk) - lasso_cost(p, z_star);
  r.rhs = (quad0 + lip_term + quad1) / (2.0 * k);
  r.satisfied = r.lhs <= r.rhs + 1e-9;
  r.terms = {{"k", double(k)},
             {"quad0", quad0},
             {"quad1", quad1},
             {"lipschitz_subgrad", lip0},
             {"lipschitz_sparse", lb.sparse},
             {"lipschitz_term", lip_term},
             {"residual0_norm", spectral_norm_sym(f0.R)}};
  return r;
}

double dataset_factorization_objective(const Factorization& f, const DatasetTriples& data,
                                       const MatrixXd& B, double lambda) {
  (void)B;
  const Eigen::Index N = data.Z0.cols();
  if (N == 0) throw std::invalid_argument("dataset_factorization_objective: empty dataset");
  if (data.Z1.cols() != N || data.Zstar.cols() != N)
    throw std::invalid_argument("dataset_factorization_objective: column count mismatch");
  double acc = 0;
  for (Eigen::Index i = 0; i < N; ++i) {
    VectorXd v = data.Z0.col(i) - data.Zstar.col(i);
    acc += 0.5 * v.dot(f.R * v) + delta_A(f.A, data.Zstar.col(i), lambda) -
           delta_A(f.A, data.Z1.col(i), lambda);
  }
  return acc / double(N);
}

}  // namespace sclab
