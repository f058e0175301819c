#include "sclab/solvers.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "sclab/factorization.hpp"
#include "sclab/matrix_io.hpp"
#include "sclab/rng.hpp"

namespace sclab {

namespace {

void record(SolverTrace& t, const LassoProblem& p, const VectorXd& z, bool keep_iterate) {
  t.costs.push_back(lasso_cost(p, z));
  t.support_sizes.push_back(support_size(z));
  if (keep_iterate) t.iterates.push_back(z);
}

}  // namespace

SolverTrace ista(const LassoProblem& p, const VectorXd& z0, int K, bool record_iterates) {
  if (K < 0) throw std::invalid_argument("ista: K must be >= 0");
  auto t0 = std::chrono::steady_clock::now();
  Factorization id = identity_factorization(p);
  SolverTrace trace;
  VectorXd z = z0;
  record(trace, p, z, true);
  for (int k = 0; k < K; ++k) {
    z = factorized_step(p, z, id);
    record(trace, p, z, record_iterates || k == K - 1);
  }
  trace.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

SolverTrace fista(const LassoProblem& p, const VectorXd& z0, int K, bool record_iterates) {
  if (K < 0) throw std::invalid_argument("fista: K must be >= 0");
  auto t0 = std::chrono::steady_clock::now();
  Factorization id = identity_factorization(p);
  SolverTrace trace;
  VectorXd z = z0, z_prev = z0;
  double t_prev = 1.0, t_cur = 1.0;  // t_{k-1}, t_k with t_{-1} = t_0 = 1
  record(trace, p, z, true);
  for (int k = 0; k < K; ++k) {
    VectorXd y = z + ((t_prev - 1.0) / t_cur) * (z - z_prev);
    z_prev = z;
    z = factorized_step(p, y, id);
    t_prev = t_cur;
    t_cur = (1.0 + std::sqrt(1.0 + 4.0 * t_cur * t_cur)) / 2.0;
    record(trace, p, z, record_iterates || k == K - 1);
  }
  trace.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

double fixed_point_residual(const LassoProblem& p, const VectorXd& z) {
  VectorXd grad = p.B() * z - p.dtx;
  VectorXd next = soft_threshold(z - grad / p.L(), p.lambda / p.L());
  return (z - next).norm();
}

SparseCode reference_solution(const LassoProblem& p, double tol) {
  if (tol <= 0) throw std::invalid_argument("reference_solution: tol must be > 0");
  const double L = p.L();
  const double thr = p.lambda / L;
  const Eigen::Index m = p.m();
  VectorXd z = VectorXd::Zero(m), z_prev = z, y = z;
  double t_prev = 1.0, t_cur = 1.0;
  const long max_iter = 1000000;
  double res = std::numeric_limits<double>::infinity();
  for (long k = 0; k < max_iter; ++k) {
    VectorXd grad = p.B() * y - p.dtx;
    VectorXd z_next = soft_threshold(y - grad / L, thr);
    // gradient-scheme adaptive restart
    if ((y - z_next).dot(z_next - z) > 0) {
      t_prev = 1.0;
      t_cur = 1.0;
      y = z;
      continue;
    }
    z_prev = z;
    z = z_next;
    if (k % 4 == 0) {
      res = fixed_point_residual(p, z);
      if (res <= tol) return z;
    }
    t_prev = t_cur;
    t_cur = (1.0 + std::sqrt(1.0 + 4.0 * t_cur * t_cur)) / 2.0;
    y = z + ((t_prev - 1.0) / t_cur) * (z - z_prev);
  }
  throw ConvergenceError(fixed_point_residual(p, z));
}

LinearTrainResult train_linear_baseline(const MatrixXd& samples, const Dictionary& d,
                                        double lambda, const SgdConfig& config) {
  if (samples.rows() != d.n()) throw std::invalid_argument("train_linear_baseline: sample dim != n");
  if (samples.cols() < 1) throw std::invalid_argument("train_linear_baseline: no samples");
  const Eigen::Index n = d.n(), m = d.m(), N = samples.cols();
  const MatrixXd& D = d.entries;

  auto mean_cost = [&](const MatrixXd& A0) {
    double acc = 0;
    for (Eigen::Index j = 0; j < N; ++j) {
      VectorXd z = A0 * samples.col(j);
      acc += 0.5 * (samples.col(j) - D * z).squaredNorm() + lambda * z.lpNorm<1>();
    }
    return acc / double(N);
  };

  LinearTrainResult out;
  MatrixXd A0 = MatrixXd::Zero(m, n);
  MatrixXd best = A0;
  double init_cost = mean_cost(A0), best_cost = init_cost;
  out.curve.emplace_back(0, init_cost);

  // step scaled by the per-sample curvature ‖B‖‖x‖² so the default rate is
  // stable across data scales
  const double L = spectral_norm_sym(D.transpose() * D);
  Rng rng(config.seed);
  for (int step = 1; step <= config.steps; ++step) {
    const VectorXd x = samples.col(rng.uniform_index(N));
    VectorXd z = A0 * x;
    VectorXd g = D.transpose() * (D * z - x) + lambda * sign_vector(z);
    A0.noalias() -= (config.learning_rate / (1.0 + L * x.squaredNorm())) * g * x.transpose();
    if (step % config.eval_every == 0 || step == config.steps) {
      double c = mean_cost(A0);
      out.curve.emplace_back(step, c);
      if (c > 1e6 * std::max(init_cost, 1e-300))
        throw std::runtime_error("linear baseline training diverged (cost " + std::to_string(c) + ")");
      if (c < best_cost) {
        best_cost = c;
        best = A0;
      }
    }
  }
  out.baseline.A0 = best;
  return out;
}

SolverTrace warm_started_ista(const LassoProblem& p, const LinearBaseline& baseline, int K) {
  return ista(p, baseline.A0 * p.x, K);
}

std::string trace_to_csv(const SolverTrace& t, double f_star) {
  std::ostringstream out;
  out << "iteration,cost,cost_gap,support_size\n";
  for (size_t k = 0; k < t.costs.size(); ++k) {
    out << k << ',' << format_double(t.costs[k]) << ',' << format_double(t.costs[k] - f_star)
        << ',' << t.support_sizes[k] << '\n';
  }
  return out.str();
}

}  // namespace sclab
