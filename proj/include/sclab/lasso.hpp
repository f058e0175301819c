#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

namespace sclab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Codes are plain dense vectors; sparsity means exact zeros.
using SparseCode = VectorXd;

enum class DictKind { gaussian, fourier_adversarial, user_supplied };

/// Dictionary of unit-norm atoms (columns). rows = signal dimension n,
/// cols = number of atoms m.
struct Dictionary {
  MatrixXd entries;
  std::uint64_t seed = 0;
  DictKind kind = DictKind::user_supplied;

  Eigen::Index n() const { return entries.rows(); }
  Eigen::Index m() const { return entries.cols(); }
  bool overcomplete() const { return m() > n(); }
};

/// Validates unit column norms (1e-12); warns once on stderr when m <= n.
Dictionary make_dictionary(MatrixXd entries, DictKind kind = DictKind::user_supplied,
                           std::uint64_t seed = 0);

Dictionary sample_gaussian_dictionary(int n, int m, std::uint64_t seed);

// Real Fourier atoms: the frequencies {0, 1/m, ..., 1/2} in seeded shuffled
// order; one cos/sin pair per interior frequency, single atoms at DC and
// Nyquist. Requires n even and even m >= n.
Dictionary adversarial_fourier_dictionary(int n, int m, std::uint64_t seed,
                                          std::vector<double>* frequencies_out = nullptr);

/// Per-dictionary quantities shared by every problem built on the same atoms.
struct DictOps {
  Dictionary dict;
  MatrixXd B;     // Gram matrix DᵀD
  MatrixXd pinv;  // D† (least-norm pseudo-inverse, SVD-truncated)
  double L = 0;   // ‖B‖₂
};

std::shared_ptr<const DictOps> make_dict_ops(Dictionary d);

/// One LASSO instance: minimize F_x(z) = ½‖x − Dz‖² + λ‖z‖₁.
struct LassoProblem {
  std::shared_ptr<const DictOps> ops;
  VectorXd x;    // input signal (n)
  VectorXd y;    // D† x (m)
  VectorXd dtx;  // Dᵀ x (m)
  double lambda = 0;

  const Dictionary& dict() const { return ops->dict; }
  const MatrixXd& D() const { return ops->dict.entries; }
  const MatrixXd& B() const { return ops->B; }
  double L() const { return ops->L; }
  Eigen::Index n() const { return ops->dict.n(); }
  Eigen::Index m() const { return ops->dict.m(); }
};

LassoProblem build_problem(const Dictionary& d, VectorXd x, double lambda);
LassoProblem build_problem(std::shared_ptr<const DictOps> ops, VectorXd x, double lambda);

/// h_θ(u) = sign(u)(|u|−θ)+ with per-coordinate thresholds.
VectorXd soft_threshold(const VectorXd& u, const VectorXd& theta);
VectorXd soft_threshold(const VectorXd& u, double theta);

double lasso_cost(const LassoProblem& p, const SparseCode& z);

/// ‖z‖₀ (exact nonzero count).
Eigen::Index support_size(const VectorXd& z);

/// sign with sign(0) = 0.
VectorXd sign_vector(const VectorXd& z);

/// Bernoulli-Gaussian code model: z_i = b_i a_i, b_i ~ B(rho), a_i ~ N(0, sigma²).
struct BernoulliGaussianModel {
  double rho = 0.05;
  double sigma = 10.0;
  int m = 100;
};

/// Codes as columns of an m×count matrix.
MatrixXd sample_codes(const BernoulliGaussianModel& model, int count, std::uint64_t seed);

struct Dataset {
  MatrixXd Z;  // m×count true codes
  MatrixXd X;  // n×count signals, X = D Z
};

Dataset sample_dataset(const Dictionary& d, const BernoulliGaussianModel& model, int count,
                       std::uint64_t seed);

/// Largest eigenvalue of a symmetric matrix: dense solve for m <= 256, power
/// iteration (rel. tol 1e-10, <= 1e4 iterations) above.
double spectral_norm_sym(const MatrixXd& M);

/// Smallest eigenvalue (dense).
double min_eigenvalue_sym(const MatrixXd& M);

}  // namespace sclab
