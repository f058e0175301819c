#include "sclab/lasso.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>

#include "sclab/rng.hpp"

namespace sclab {

Dictionary make_dictionary(MatrixXd entries, DictKind kind, std::uint64_t seed) {
  if (entries.rows() < 1 || entries.cols() < 1)
    throw std::invalid_argument("dictionary must have at least one row and column");
  for (Eigen::Index j = 0; j < entries.cols(); ++j) {
    double norm = entries.col(j).norm();
    if (std::abs(norm - 1.0) > 1e-12)
      throw std::invalid_argument("dictionary column " + std::to_string(j) +
                                  " is not unit norm (|1 - norm| = " +
                                  std::to_string(std::abs(norm - 1.0)) + ")");
  }
  if (entries.cols() <= entries.rows()) {
    static bool warned = false;
    if (!warned) {
      std::cerr << "sclab: note: dictionary is not overcomplete (m <= n)\n";
      warned = true;
    }
  }
  return Dictionary{std::move(entries), seed, kind};
}

Dictionary sample_gaussian_dictionary(int n, int m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw std::invalid_argument("dictionary dims must be >= 1");
  Rng rng(seed);
  MatrixXd D(n, m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) D(i, j) = rng.normal();
    D.col(j) /= D.col(j).norm();
  }
  return Dictionary{std::move(D), seed, DictKind::gaussian};
}

Dictionary adversarial_fourier_dictionary(int n, int m, std::uint64_t seed,
                                          std::vector<double>* frequencies_out) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("adversarial dictionary needs even n >= 2");
  if (m < 2) throw std::invalid_argument("adversarial dictionary needs m >= 2");

  // Atom j is the complex exponential e^{-2πij ζ_k} sampled at n/2 distinct
  // frequencies, realized as real (cos, sin) coordinate pairs. The frequency
  // pool {1/m, ..., (m/2)/m} excludes the endpoints whose sine row vanishes
  // identically. The atoms form a tight frame (DDᵀ = (m/n) I), so the Gram
  // eigenbasis is the flat Fourier basis over the atom index.
  std::vector<int> pool;
  for (int a = 1; 2 * a < m; ++a) pool.push_back(a);
  if (static_cast<int>(pool.size()) < n / 2)
    throw std::invalid_argument("not enough distinct frequencies: need m/2 > n/2");
  Rng rng(seed);
  for (size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.uniform_index(i)]);
  pool.resize(n / 2);

  const double two_pi = 2.0 * std::numbers::pi;
  const double scale = std::sqrt(2.0 / n);
  MatrixXd D(n, m);
  std::vector<double> freqs;
  for (int k = 0; k < n / 2; ++k) {
    double zeta = static_cast<double>(pool[k]) / m;
    freqs.push_back(zeta);
    for (int j = 0; j < m; ++j) {
      D(2 * k, j) = scale * std::cos(two_pi * zeta * j);
      D(2 * k + 1, j) = scale * std::sin(two_pi * zeta * j);
    }
  }
  for (int j = 0; j < m; ++j) D.col(j) /= D.col(j).norm();
  if (frequencies_out) *frequencies_out = freqs;
  return Dictionary{std::move(D), seed, DictKind::fourier_adversarial};
}

double spectral_norm_sym(const MatrixXd& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("spectral_norm_sym: square matrix required");
  if (M.rows() <= 256) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return std::max(std::abs(es.eigenvalues().minCoeff()), std::abs(es.eigenvalues().maxCoeff()));
  }
  // power iteration on M (PSD use only at this size)
  Rng rng(12345);
  VectorXd v(M.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  v.normalize();
  double lambda = 0;
  for (int it = 0; it < 10000; ++it) {
    VectorXd w = M * v;
    double nw = w.norm();
    if (nw == 0) return 0;
    w /= nw;
    double next = w.dot(M * w);
    if (std::abs(next - lambda) <= 1e-10 * std::abs(next)) return next;
    lambda = next;
    v = w;
  }
  return lambda;
}

double min_eigenvalue_sym(const MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::shared_ptr<const DictOps> make_dict_ops(Dictionary d) {
  auto ops = std::make_shared<DictOps>();
  const MatrixXd& D = d.entries;
  ops->B = D.transpose() * D;

  double sym_err = (ops->B - ops->B.transpose()).cwiseAbs().maxCoeff();
  if (sym_err > 1e-12) throw std::runtime_error("Gram matrix not symmetric");
  if (ops->B.cols() <= 256) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(ops->B, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw std::runtime_error("Gram matrix not PSD");
    ops->L = es.eigenvalues().maxCoeff();
  } else {
    ops->L = spectral_norm_sym(ops->B);
  }

  Eigen::JacobiSVD<MatrixXd> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double cutoff = 1e-10 * sv(0);
  VectorXd inv = sv.unaryExpr([&](double s) { return s > cutoff ? 1.0 / s : 0.0; });
  ops->pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();

  ops->dict = std::move(d);
  return ops;
}

LassoProblem build_problem(std::shared_ptr<const DictOps> ops, VectorXd x, double lambda) {
  if (x.size() != ops->dict.n()) throw std::invalid_argument("build_problem: x has wrong dimension");
  if (lambda < 0) throw std::invalid_argument("build_problem: lambda must be >= 0");
  LassoProblem p;
  p.y = ops->pinv * x;
  p.dtx = ops->dict.entries.transpose() * x;
  p.x = std::move(x);
  p.lambda = lambda;
  p.ops = std::move(ops);
  return p;
}

LassoProblem build_problem(const Dictionary& d, VectorXd x, double lambda) {
  return build_problem(make_dict_ops(d), std::move(x), lambda);
}

VectorXd soft_threshold(const VectorXd& u, const VectorXd& theta) {
  if (u.size() != theta.size()) throw std::invalid_argument("soft_threshold: size mismatch");
  if ((theta.array() < 0).any()) throw std::invalid_argument("soft_threshold: negative threshold");
  VectorXd out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    double mag = std::abs(u(i)) - theta(i);
    out(i) = mag > 0 ? (u(i) > 0 ? mag : -mag) : 0.0;
  }
  return out;
}

VectorXd soft_threshold(const VectorXd& u, double theta) {
  return soft_threshold(u, VectorXd::Constant(u.size(), theta));
}

double lasso_cost(const LassoProblem& p, const SparseCode& z) {
  if (z.size() != p.m()) throw std::invalid_argument("lasso_cost: code has wrong dimension");
  return 0.5 * (p.x - p.D() * z).squaredNorm() + p.lambda * z.lpNorm<1>();
}

Eigen::Index support_size(const VectorXd& z) {
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (z(i) != 0.0) ++c;
  return c;
}

VectorXd sign_vector(const VectorXd& z) {
  VectorXd s(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) s(i) = z(i) > 0 ? 1.0 : (z(i) < 0 ? -1.0 : 0.0);
  return s;
}

MatrixXd sample_codes(const BernoulliGaussianModel& model, int count, std::uint64_t seed) {
  if (model.rho < 0 || model.rho > 1) throw std::invalid_argument("rho must be in [0,1]");
  if (model.sigma < 0) throw std::invalid_argument("sigma must be >= 0");
  Rng rng(seed);
  MatrixXd Z = MatrixXd::Zero(model.m, count);
  for (int j = 0; j < count; ++j)
    for (int i = 0; i < model.m; ++i)
      if (rng.bernoulli(model.rho)) Z(i, j) = rng.normal(model.sigma);
  return Z;
}

Dataset sample_dataset(const Dictionary& d, const BernoulliGaussianModel& model, int count,
                       std::uint64_t seed) {
  if (model.m != d.m()) throw std::invalid_argument("code model dimension != dictionary atoms");
  Dataset ds;
  ds.Z = sample_codes(model, count, seed);
  ds.X = d.entries * ds.Z;
  return ds;
}

}  // namespace sclab
