#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sclab/lasso.hpp"

namespace sclab {

struct SolverTrace {
  std::vector<double> costs;          // F(z_k), k = 0..K
  std::vector<Eigen::Index> support_sizes;
  std::vector<VectorXd> iterates;     // filled when requested
  double wall_time = 0;               // seconds

  const VectorXd& final_iterate() const { return iterates.back(); }
};

/// z_{k+1} = h_{λ/L}(z_k − (B z_k − Dᵀx)/L); the inner step is the factorized
/// kernel with (I, L·1), shared with FacNet.
SolverTrace ista(const LassoProblem& p, const VectorXd& z0, int K, bool record_iterates = true);

/// FISTA, t_{k+1} = (1 + √(1 + 4t_k²))/2, t_0 = 1.
SolverTrace fista(const LassoProblem& p, const VectorXd& z0, int K, bool record_iterates = true);

struct ConvergenceError : std::runtime_error {
  double residual;
  explicit ConvergenceError(double res)
      : std::runtime_error("reference solution did not converge; fixed-point residual = " +
                           std::to_string(res)),
        residual(res) {}
};

/// High-accuracy z* via FISTA with adaptive restarts; stops when the
/// fixed-point residual ‖z − h_{λ/L}(z − (Bz − Dᵀx)/L)‖₂ <= tol.
/// Throws ConvergenceError after 1e6 iterations.
SparseCode reference_solution(const LassoProblem& p, double tol = 1e-12);

double fixed_point_residual(const LassoProblem& p, const VectorXd& z);

/// One-layer warm-start model z_out = A⁰ x.
struct LinearBaseline {
  MatrixXd A0;  // m×n
};

struct SgdConfig {
  int steps = 10000;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  int eval_every = 500;
};

struct LinearTrainResult {
  LinearBaseline baseline;
  std::vector<std::pair<int, double>> curve;  // (step, mean cost on eval slice)
};

/// SGD on the per-sample cost ½‖x − D A⁰x‖² + λ‖A⁰x‖₁, started from A⁰ = 0.
/// Returns the best evaluated checkpoint. Throws on divergence
/// (loss > 1e6 × initial).
LinearTrainResult train_linear_baseline(const MatrixXd& samples, const Dictionary& d,
                                        double lambda, const SgdConfig& config);

SolverTrace warm_started_ista(const LassoProblem& p, const LinearBaseline& baseline, int K);

/// CSV columns: iteration,cost,cost_gap,support_size.
std::string trace_to_csv(const SolverTrace& t, double f_star);

}  // namespace sclab
