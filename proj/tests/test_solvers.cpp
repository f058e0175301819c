#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "support.hpp"

using namespace sclab;
using namespace sclab::testing;

TEST_CASE("ista with K=0 returns the starting point") {
  auto rp = random_problem(8, 12, 0.1, 4);
  VectorXd z0 = VectorXd::Ones(12);
  SolverTrace t = ista(rp.problem, z0, 0);
  REQUIRE(t.costs.size() == 1);
  CHECK(t.costs[0] == lasso_cost(rp.problem, z0));
  CHECK(t.iterates[0] == z0);
}

TEST_CASE("one ista step solves the orthonormal problem") {
  // orthonormal dictionary from QR of a random square matrix
  Rng rng(5);
  MatrixXd G(6, 6);
  for (int i = 0; i < G.size(); ++i) G.data()[i] = rng.normal();
  MatrixXd Q = Eigen::HouseholderQR<MatrixXd>(G).householderQ();
  Dictionary d = make_dictionary(Q);
  VectorXd x(6);
  for (int i = 0; i < 6; ++i) x(i) = rng.normal(2.0);
  double lambda = 0.3;
  LassoProblem p = build_problem(d, x, lambda);

  SolverTrace t = ista(p, VectorXd::Zero(6), 1);
  VectorXd closed = orthonormal_lasso_solution(Q, x, lambda);
  CHECK((t.final_iterate() - closed).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("ista satisfies the classical 1/k bound and monotone descent") {
  auto rp = random_problem(64, 100, 0.01, 77, 0.05, 10.0);
  const LassoProblem& p = rp.problem;
  VectorXd z0 = VectorXd::Zero(100);
  VectorXd z_star = reference_solution(p, 1e-12);
  double f_star = lasso_cost(p, z_star);
  double c = p.L() * (z_star - z0).squaredNorm() / 2.0;

  SolverTrace t = ista(p, z0, 1000, false);
  for (size_t k = 1; k < t.costs.size(); ++k) {
    CHECK(t.costs[k] <= t.costs[k - 1] + 1e-10);  // descent
    double bound = c / double(k);
    CHECK(t.costs[k] - f_star <= bound + 1e-9 * (1.0 + std::abs(bound)));
  }
}

TEST_CASE("fista first iterate and t-sequence") {
  auto rp = random_problem(16, 24, 0.05, 8);
  VectorXd z0 = VectorXd::Zero(24);
  SolverTrace ti = ista(rp.problem, z0, 1);
  SolverTrace tf = fista(rp.problem, z0, 1);
  CHECK(ti.final_iterate() == tf.final_iterate());

  double t0 = 1.0;
  double t1 = (1.0 + std::sqrt(1.0 + 4.0 * t0 * t0)) / 2.0;
  CHECK(t1 == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
}

TEST_CASE("fista beats ista at K=100 on most seeds") {
  int wins = 0, total = 20;
  for (int s = 0; s < total; ++s) {
    auto rp = random_problem(24, 36, 0.05, 900 + s);
    VectorXd z0 = VectorXd::Zero(36);
    double fi = ista(rp.problem, z0, 100, false).costs.back();
    double ff = fista(rp.problem, z0, 100, false).costs.back();
    if (ff <= fi + 1e-12) ++wins;
  }
  CHECK(wins >= int(0.95 * total));
}

TEST_CASE("ista and fista agree in the long run") {
  for (std::uint64_t seed : {31u, 32u}) {
    auto rp = random_problem(16, 24, 0.1, seed, 0.2, 1.0);
    VectorXd z0 = VectorXd::Zero(24);
    double fi = ista(rp.problem, z0, 10000, false).costs.back();
    double ff = fista(rp.problem, z0, 10000, false).costs.back();
    CHECK(std::abs(fi - ff) <= 1e-8);
  }
}

TEST_CASE("reference solution") {
  // orthonormal closed form
  Rng rng(6);
  MatrixXd G(5, 5);
  for (int i = 0; i < G.size(); ++i) G.data()[i] = rng.normal();
  MatrixXd Q = Eigen::HouseholderQR<MatrixXd>(G).householderQ();
  VectorXd x(5);
  for (int i = 0; i < 5; ++i) x(i) = rng.normal(2.0);
  LassoProblem p = build_problem(make_dictionary(Q), x, 0.2);
  VectorXd z_star = reference_solution(p, 1e-12);
  CHECK((z_star - orthonormal_lasso_solution(Q, x, 0.2)).norm() <= 1e-10);
  CHECK(fixed_point_residual(p, z_star) <= 1e-12);

  // above the critical lambda the solution is zero
  auto rp = random_problem(10, 15, 0.0, 9);
  double crit = rp.problem.dtx.cwiseAbs().maxCoeff();
  LassoProblem ph = build_problem(rp.ops, rp.problem.x, crit * 1.01);
  CHECK(reference_solution(ph, 1e-12).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear baseline training") {
  auto rp = random_problem(8, 12, 0.05, 12);
  Dataset data = sample_dataset(rp.dict, {0.2, 1.0, 12}, 400, 13);

  // smooth-part gradient vs central finite differences
  MatrixXd A0(12, 8);
  Rng rng(14);
  for (int i = 0; i < A0.size(); ++i) A0.data()[i] = 0.1 * rng.normal();
  const MatrixXd& D = rp.dict.entries;
  VectorXd x = data.X.col(0);
  MatrixXd grad = (D.transpose() * (D * (A0 * x) - x)) * x.transpose();
  for (auto [r, c] : {std::pair{0, 0}, std::pair{5, 3}, std::pair{11, 7}}) {
    auto f = [&](double h) {
      MatrixXd Ah = A0;
      Ah(r, c) += h;
      return 0.5 * (x - D * (Ah * x)).squaredNorm();
    };
    double fd = central_diff(f, 1e-6);
    CHECK(std::abs(grad(r, c) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }

  SgdConfig cfg;
  cfg.steps = 3000;
  cfg.learning_rate = 0.01;
  cfg.seed = 15;
  LinearTrainResult res = train_linear_baseline(data.X, rp.dict, 0.05, cfg);

  // zero matrix scores the trivial cost on every sample
  double zero_cost = 0;
  for (int j = 0; j < data.X.cols(); ++j) zero_cost += 0.5 * data.X.col(j).squaredNorm();
  zero_cost /= double(data.X.cols());
  CHECK(res.curve.front().second == doctest::Approx(zero_cost).epsilon(1e-12));

  double trained_cost = 0;
  for (int j = 0; j < data.X.cols(); ++j) {
    VectorXd z = res.baseline.A0 * data.X.col(j);
    trained_cost += 0.5 * (data.X.col(j) - D * z).squaredNorm() + 0.05 * z.lpNorm<1>();
  }
  trained_cost /= double(data.X.cols());
  CHECK(trained_cost <= zero_cost);

  // smoothed trend downward
  CHECK(res.curve.back().second <= res.curve.front().second + 1e-12);
}

TEST_CASE("warm started ista is plain ista from the warm start") {
  auto rp = random_problem(8, 12, 0.05, 16);
  LinearBaseline lin;
  Rng rng(17);
  lin.A0 = MatrixXd(12, 8);
  for (int i = 0; i < lin.A0.size(); ++i) lin.A0.data()[i] = 0.05 * rng.normal();
  SolverTrace a = warm_started_ista(rp.problem, lin, 7);
  SolverTrace b = ista(rp.problem, lin.A0 * rp.problem.x, 7);
  REQUIRE(a.costs.size() == b.costs.size());
  for (size_t k = 0; k < a.costs.size(); ++k) CHECK(a.costs[k] == b.costs[k]);
  CHECK(a.costs[0] == lasso_cost(rp.problem, lin.A0 * rp.problem.x));
}

TEST_CASE("trace csv format") {
  auto rp = random_problem(6, 9, 0.1, 18);
  SolverTrace t = ista(rp.problem, VectorXd::Zero(9), 3);
  std::string csv = trace_to_csv(t, 0.0);
  CHECK(csv.substr(0, csv.find('\n')) == "iteration,cost,cost_gap,support_size");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 rows
}
