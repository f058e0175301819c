// Acceptance suite: numbered end-to-end checks over the full pipeline, one
// PASS/FAIL line each. Returns the number of failed checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sclab/experiments.hpp"
#include "sclab/factorization.hpp"
#include "sclab/generic_gap.hpp"
#include "sclab/nets.hpp"
#include "sclab/rng.hpp"
#include "sclab/solvers.hpp"
#include "support.hpp"

using namespace sclab;
using namespace sclab::testing;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int id, bool ok, const std::string& name, const std::string& detail, double secs) {
  if (!ok) ++g_failures;
  std::printf("%s  criterion %2d  %-38s %s  [%.1fs]\n", ok ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str(), secs);
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

constexpr std::uint64_t kMcSeed = 300000;

// desk-scale training defaults for criteria 10 and 11
TrainConfig accept_train_config(std::uint64_t seed, NetKind kind) {
  TrainConfig cfg;
  cfg.steps = kind == NetKind::facnet ? 4000 : 800;
  cfg.batch_size = kind == NetKind::facnet ? 100 : 200;
  cfg.learning_rate = kind == NetKind::facnet ? 0.02 : 0.05;
  cfg.eval_every = 200;
  cfg.seed = seed;
  return cfg;
}

std::vector<double> ista_gaps_by_depth(std::shared_ptr<const DictOps> ops, const EvalSet& eval,
                                       int maxd) {
  std::vector<double> gaps(maxd + 1, 0.0);
  for (Eigen::Index j = 0; j < eval.X.cols(); ++j) {
    LassoProblem p = build_problem(ops, eval.X.col(j), eval.lambda);
    SolverTrace t = ista(p, VectorXd::Zero(p.m()), maxd, false);
    for (int k = 0; k <= maxd; ++k) gaps[k] += (t.costs[k] - eval.f_star[j]) / eval.X.cols();
  }
  return gaps;
}

// --------------------------------------------------------------------------

void criterion1() {
  Timer timer;
  const int n = 64, m = 100, K = 500;
  const double lambda = 0.01;
  int violations = 0, problems = 50;
  double worst_slack = 1e300;
  for (int i = 0; i < problems; ++i) {
    Dictionary dict = sample_gaussian_dictionary(n, m, derive_seed(11000, i));
    auto ops = make_dict_ops(dict);
    Dataset data = sample_dataset(dict, {0.05, 10.0, m}, 1, derive_seed(12000, i));
    LassoProblem p = build_problem(ops, data.X.col(0), lambda);
    VectorXd z0 = VectorXd::Zero(m);
    VectorXd z_star = reference_solution(p, 1e-11);
    double f_star = lasso_cost(p, z_star);
    double c = p.L() * (z_star - z0).squaredNorm() / 2.0;
    SolverTrace t = ista(p, z0, K, false);
    for (int k = 1; k <= K; ++k) {
      double bound = c / double(k);
      double slack = bound + 1e-9 * (1.0 + std::abs(bound)) - (t.costs[k] - f_star);
      if (slack < 0) ++violations;
      worst_slack = std::min(worst_slack, slack);
    }
  }
  std::ostringstream d;
  d << violations << " violations over " << problems << " problems x " << K
    << " iterations, min slack " << worst_slack;
  report(1, violations == 0 && timer.seconds() < 120.0, "ista 1/k bound", d.str(),
         timer.seconds());
}

void criterion2() {
  Timer timer;
  int satisfied = 0, total = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    int n = 6 + int(s % 11);   // 6..16
    int m = 8 + int(s % 9);    // 8..16
    double lambda = 0.02 + 0.02 * double(s % 5);
    auto rp = random_problem(n, m, lambda, derive_seed(21000, s));
    VectorXd z_star = reference_solution(rp.problem, 1e-12);
    Rng rng(derive_seed(22000, s));
    for (int t = 0; t < 5; ++t) {
      Factorization f = random_psd_factorization(rp.problem.B(), rng.uniform(0.01, 0.25), rng);
      VectorXd z(m);
      for (int i = 0; i < m; ++i) z(i) = rng.bernoulli(0.5) ? rng.normal(2.0) : 0.0;
      BoundReport r = prop1_check(rp.problem, z, f, z_star);
      ++total;
      if (r.satisfied && r.psd_ok) ++satisfied;
    }
  }
  std::ostringstream d;
  d << satisfied << "/" << total << " inequalities hold";
  report(2, satisfied == total && total >= 1000 && timer.seconds() < 60.0,
         "proposition 1 property suite", d.str(), timer.seconds());
}

void criterion3() {
  Timer timer;
  bool ok = true;
  double worst = 0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    auto rp = random_problem(64, 100, 0.01, derive_seed(31000, s), 0.05, 10.0);
    VectorXd z0 = VectorXd::Zero(100);
    VectorXd z_star = reference_solution(rp.problem, 1e-11);
    Factorization id = identity_factorization(rp.problem);
    for (int k : {1, 5, 20}) {
      std::vector<Factorization> schedule(k, id);
      BoundReport r = theorem1_bound(rp.problem, z0, schedule, z_star);
      double classical = rp.problem.L() * (z_star - z0).squaredNorm() / (2.0 * k);
      double err = std::abs(r.rhs - classical);
      worst = std::max(worst, err);
      ok = ok && err <= 1e-9 && r.satisfied;
    }
  }
  std::ostringstream d;
  d << "max |rhs - classical| = " << worst;
  report(3, ok, "theorem 1 identity-schedule equality", d.str(), timer.seconds());
}

void criterion4() {
  Timer timer;
  const int K = 10;
  double worst = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto rp = random_problem(64, 100, 0.01, derive_seed(41000, s), 0.05, 10.0);
    VectorXd z0 = VectorXd::Zero(100);
    VectorXd ista_out = ista(rp.problem, z0, K, false).final_iterate();
    VectorXd fista_out = fista(rp.problem, z0, K, false).final_iterate();

    VectorXd lista_out = lista_forward(lista_init(*rp.ops, rp.problem.lambda, K), rp.problem.x);
    VectorXd lfista_out = lfista_forward(lfista_init(*rp.ops, rp.problem.lambda, K), rp.problem.x);
    VectorXd facnet_out = facnet_forward(facnet_init(*rp.ops, rp.problem.lambda, K), rp.problem);

    worst = std::max(worst, (lista_out - ista_out).cwiseAbs().maxCoeff());
    worst = std::max(worst, (lfista_out - fista_out).cwiseAbs().maxCoeff());
    worst = std::max(worst, (facnet_out - ista_out).cwiseAbs().maxCoeff());
  }
  std::ostringstream d;
  d << "max coordinate difference " << worst;
  report(4, worst <= 1e-10, "network/solver init equivalence", d.str(), timer.seconds());
}

void collect_refs(ListaParams& p, std::vector<std::pair<double*, bool>>& out);
void collect_refs(LfistaParams& p, std::vector<std::pair<double*, bool>>& out);
void collect_refs(FacnetParams& p, std::vector<std::pair<double*, bool>>& out);

// finite-difference gradient check at kink-avoiding inputs
template <class Params, class Perturb, class Margin>
double fd_worst_error(int want_seeds, std::uint64_t base, Perturb make_params, Margin margin_of) {
  const int m = 8, n = 5;
  double worst = 0;
  int done = 0;
  for (std::uint64_t s = 0; done < want_seeds && s < std::uint64_t(want_seeds) * 4; ++s) {
    auto rp = random_problem(n, m, 0.1, derive_seed(base, s), 0.4, 1.0);
    NetContext ctx{rp.ops, 0.1};
    Rng rng(derive_seed(base + 1, s));
    MatrixXd X = rp.dict.entries * sample_codes({0.4, 1.0, m}, 3, derive_seed(base + 2, s));
    Params params = make_params(*rp.ops, rng);
    double margin = 1e300;
    for (int j = 0; j < X.cols(); ++j)
      margin = std::min(margin, margin_of(params, rp.problem, VectorXd(X.col(j))));
    if (margin < 1e-4) continue;
    ++done;

    Params grads;
    net_backward(params, ctx, X, grads);
    // flatten and compare against central differences
    std::vector<std::pair<double*, bool>> refs;  // (ptr, log_space)
    collect_refs(params, refs);
    std::vector<double> g;
    {
      std::vector<std::pair<double*, bool>> gr;
      collect_refs(grads, gr);
      for (auto& r : gr) g.push_back(*r.first);
    }
    const double h = 1e-6;
    double gmax = 0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    const double floor = 1e-3 * std::max(1.0, gmax);
    for (size_t i = 0; i < refs.size(); ++i) {
      double saved = *refs[i].first;
      double fp, fm;
      if (refs[i].second) {
        *refs[i].first = saved * std::exp(h);
        fp = net_loss(params, ctx, X);
        *refs[i].first = saved * std::exp(-h);
        fm = net_loss(params, ctx, X);
      } else {
        *refs[i].first = saved + h;
        fp = net_loss(params, ctx, X);
        *refs[i].first = saved - h;
        fm = net_loss(params, ctx, X);
      }
      *refs[i].first = saved;
      double fd = (fp - fm) / (2.0 * h);
      double denom = std::max({std::abs(fd), std::abs(g[i]), floor});
      worst = std::max(worst, std::abs(fd - g[i]) / denom);
    }
  }
  if (done < want_seeds) return 1e300;
  return worst;
}

void collect_refs(ListaParams& p, std::vector<std::pair<double*, bool>>& out) {
  for (auto& l : p.layers) {
    for (int i = 0; i < l.Wg.size(); ++i) out.push_back({l.Wg.data() + i, false});
    for (int i = 0; i < l.We.size(); ++i) out.push_back({l.We.data() + i, false});
    for (int i = 0; i < l.theta.size(); ++i) out.push_back({l.theta.data() + i, false});
  }
}
void collect_refs(LfistaParams& p, std::vector<std::pair<double*, bool>>& out) {
  for (auto& l : p.layers) {
    for (int i = 0; i < l.Wg.size(); ++i) out.push_back({l.Wg.data() + i, false});
    for (int i = 0; i < l.Wm.size(); ++i) out.push_back({l.Wm.data() + i, false});
    for (int i = 0; i < l.We.size(); ++i) out.push_back({l.We.data() + i, false});
    for (int i = 0; i < l.theta.size(); ++i) out.push_back({l.theta.data() + i, false});
  }
}
void collect_refs(FacnetParams& p, std::vector<std::pair<double*, bool>>& out) {
  for (auto& l : p.layers) {
    for (int i = 0; i < l.A.size(); ++i) out.push_back({l.A.data() + i, false});
    for (int i = 0; i < l.S.size(); ++i) out.push_back({l.S.data() + i, true});
  }
}

double margin_lista(const ListaParams& p, const LassoProblem&, const VectorXd& x) {
  std::vector<VectorXd> zs;
  lista_forward(p, x, &zs);
  double margin = 1e300;
  for (int k = 0; k < p.depth(); ++k) {
    VectorXd u = p.layers[k].Wg * zs[k] + p.layers[k].We * x;
    margin = std::min(margin, (u.cwiseAbs() - p.layers[k].theta).cwiseAbs().minCoeff());
  }
  return margin;
}
double margin_lfista(const LfistaParams& p, const LassoProblem&, const VectorXd& x) {
  std::vector<VectorXd> zs;
  lfista_forward(p, x, &zs);
  double margin = 1e300;
  for (int k = 0; k < p.depth(); ++k) {
    VectorXd zprev = k >= 1 ? zs[k - 1] : VectorXd::Zero(zs[0].size()).eval();
    VectorXd u = p.layers[k].Wg * zs[k] + p.layers[k].Wm * zprev + p.layers[k].We * x;
    margin = std::min(margin, (u.cwiseAbs() - p.layers[k].theta).cwiseAbs().minCoeff());
  }
  return margin;
}
double margin_facnet(const FacnetParams& p, const LassoProblem& prob, const VectorXd& x) {
  std::vector<VectorXd> zs;
  VectorXd dtx = prob.D().transpose() * x;
  facnet_forward(p, prob.B(), dtx, prob.lambda, &zs);
  double margin = 1e300;
  for (int k = 0; k < p.depth(); ++k) {
    const auto& l = p.layers[k];
    VectorXd g = prob.B() * zs[k] - dtx;
    VectorXd u = l.A * zs[k] - (l.A * g).cwiseQuotient(l.S);
    VectorXd thr = (prob.lambda / l.S.array()).matrix();
    margin = std::min(margin, (u.cwiseAbs() - thr).cwiseAbs().minCoeff());
  }
  return margin;
}

void criterion5() {
  Timer timer;
  const int K = 3;
  double w1 = fd_worst_error<ListaParams>(
      20, 51000,
      [&](const DictOps& ops, Rng& rng) {
        ListaParams p = lista_init(ops, 0.1, K);
        for (auto& l : p.layers) {
          for (int i = 0; i < l.Wg.size(); ++i) l.Wg.data()[i] += 0.05 * rng.normal();
          for (int i = 0; i < l.We.size(); ++i) l.We.data()[i] += 0.05 * rng.normal();
          for (int i = 0; i < l.theta.size(); ++i)
            l.theta(i) = std::abs(l.theta(i) + 0.02 * rng.normal());
        }
        return p;
      },
      margin_lista);
  double w2 = fd_worst_error<LfistaParams>(
      20, 52000,
      [&](const DictOps& ops, Rng& rng) {
        LfistaParams p = lfista_init(ops, 0.1, K);
        for (auto& l : p.layers) {
          for (int i = 0; i < l.Wg.size(); ++i) l.Wg.data()[i] += 0.05 * rng.normal();
          for (int i = 0; i < l.Wm.size(); ++i) l.Wm.data()[i] += 0.05 * rng.normal();
          for (int i = 0; i < l.We.size(); ++i) l.We.data()[i] += 0.05 * rng.normal();
        }
        return p;
      },
      margin_lfista);
  double w3 = fd_worst_error<FacnetParams>(
      20, 53000,
      [&](const DictOps& ops, Rng& rng) {
        FacnetParams p = facnet_init(ops, 0.1, K, 0.7);
        for (auto& l : p.layers) {
          l.A = random_rotation_near_identity(8, 0.1, rng);
          for (int i = 0; i < l.A.size(); ++i) l.A.data()[i] += 0.02 * rng.normal();
          for (int i = 0; i < l.S.size(); ++i) l.S(i) *= std::exp(0.1 * rng.normal());
        }
        return p;
      },
      margin_facnet);
  std::ostringstream d;
  d << "max rel err lista=" << w1 << " lfista=" << w2 << " facnet=" << w3;
  report(5, w1 <= 1e-5 && w2 <= 1e-5 && w3 <= 1e-5, "gradient finite-difference check", d.str(),
         timer.seconds());
}

void criterion6() {
  Timer timer;
  MCReport r = mc_wishart_frobenius(20, 10, 2000, kMcSeed);
  std::ostringstream d;
  d << "estimate " << r.estimate << " vs 58, stderr " << r.std_error;
  report(6, r.within_tolerance && std::abs(r.reference - 58.0) < 1e-12 && timer.seconds() < 30.0,
         "wishart frobenius moment", d.str(), timer.seconds());
}

void criterion7() {
  Timer timer;
  bool ok = true;
  std::ostringstream d;
  for (auto [K, p] : {std::pair{10, 20}, std::pair{30, 50}}) {
    auto rep = mc_chi_moment(K, p, 5000, derive_seed(kMcSeed, 10 + K));
    ok = ok && rep.first_moment.within_tolerance && rep.second_moment.within_tolerance;
    d << "(K=" << K << ",p=" << p << ") EY " << rep.first_moment.estimate << "/"
      << rep.first_moment.reference << " EY2 " << rep.second_moment.estimate << "/"
      << rep.second_moment.reference << "  ";
  }
  report(7, ok, "chi moments", d.str(), timer.seconds());
}

void criterion8() {
  Timer timer;
  Lemma1Slope s = mc_lemma1_slope(20, 10, 2000, derive_seed(kMcSeed, 21));
  std::ostringstream d;
  d << "anchor " << s.anchor.estimate << " vs 38 (se " << s.anchor.std_error << "), slope "
    << s.slope << " vs " << s.reference;
  report(8, s.anchor.within_tolerance && s.slope < 0 && s.within_25pct,
         "lemma 1 first-order behavior", d.str(), timer.seconds());
}

void criterion9() {
  Timer timer;
  bool ok = true;
  std::ostringstream d;
  BernoulliGaussianModel normal{1.0, 1.0, 50};
  for (double delta : {0.01, 0.05}) {
    MCReport r = mc_lemma2(50, delta, 5000, normal, derive_seed(kMcSeed, 31 + int(delta * 100)));
    ok = ok && r.within_tolerance;
    d << "delta=" << delta << ": " << r.estimate << " <= " << r.reference << " + 3se  ";
  }
  report(9, ok, "lemma 2 bound", d.str(), timer.seconds());
}

void criterion10() {
  Timer timer;
  const int n = 64, m = 100;
  const double lambda = 0.01;
  const std::vector<int> depths = {1, 2, 4, 7};
  Dictionary dict = sample_gaussian_dictionary(n, m, 2024);
  auto ops = make_dict_ops(dict);
  BernoulliGaussianModel gen{0.05, 10.0, m};
  EvalSet eval = make_eval_set(ops, dict.entries * sample_codes(gen, 500, 777), lambda);
  std::vector<double> ista_gap = ista_gaps_by_depth(ops, eval, 7);

  bool ok = true;
  std::ostringstream d;
  for (NetKind kind : {NetKind::lista, NetKind::facnet}) {
    for (int depth : depths) {
      TrainedNet net = train(kind, gen, ops, lambda, depth,
                             accept_train_config(derive_seed(9090, depth), kind), &eval);
      bool le = net.test_gap <= ista_gap[depth] + 1e-9 * (1.0 + std::abs(ista_gap[depth]));
      bool half = depth != 4 || net.test_gap < 0.5 * ista_gap[depth];
      ok = ok && le && half;
      d << net_kind_name(kind)[0] << depth << ":" << net.test_gap / ista_gap[depth] << " ";
    }
  }
  d << "(ratios vs ista; depth-4 must be < 0.5)";
  report(10, ok && timer.seconds() < 1200.0, "fig 3 qualitative (gaussian)", d.str(),
         timer.seconds());
}

void criterion11() {
  Timer timer;
  const int n = 64, m = 100;
  const double lambda = 0.01;
  Dictionary dict = adversarial_fourier_dictionary(n, m, 2024);
  auto ops = make_dict_ops(dict);
  BernoulliGaussianModel gen{0.05, 10.0, m};
  EvalSet eval = make_eval_set(ops, dict.entries * sample_codes(gen, 500, 778), lambda);
  std::vector<double> ista_gap = ista_gaps_by_depth(ops, eval, 4);

  TrainedNet d1 = train(NetKind::facnet, gen, ops, lambda, 1,
                        accept_train_config(derive_seed(9191, 1), NetKind::facnet), &eval);
  TrainedNet d4 = train(NetKind::facnet, gen, ops, lambda, 4,
                        accept_train_config(derive_seed(9191, 4), NetKind::facnet), &eval);

  bool warm = d1.test_gap <= ista_gap[1] + 1e-9 * (1.0 + std::abs(ista_gap[1]));
  bool no_accel = d4.test_gap >= 0.5 * ista_gap[4];
  std::ostringstream d;
  d << "depth1 " << d1.test_gap << " vs ista " << ista_gap[1] << "; depth4 " << d4.test_gap
    << " vs 0.5*ista " << 0.5 * ista_gap[4];
  report(11, warm && no_accel, "fig 4 qualitative (adversarial)", d.str(), timer.seconds());
}

void criterion12() {
  Timer timer;
  const int n = 16, m = 32, iters = 300, seeds = 50;
  const double lambda = 0.01, rho = 0.05, sigma = 10.0;
  double mean0_gauss = 0, mean0_adv = 0;
  int monotone = 0, total = 0;
  for (int kind = 0; kind < 2; ++kind) {
    for (int s = 0; s < seeds; ++s) {
      std::uint64_t ds = derive_seed(61000, 100 * kind + s);
      Dictionary dict = kind == 0 ? sample_gaussian_dictionary(n, m, ds)
                                  : adversarial_fourier_dictionary(n, m, ds);
      Dataset data = sample_dataset(dict, {rho, sigma, m}, 1, derive_seed(ds, 1));
      LassoProblem p = build_problem(dict, data.X.col(0), lambda);
      auto trace = gap_trace(p, iters, VectorXd::Zero(m), reference_solution(p, 1e-11));
      (kind == 0 ? mean0_gauss : mean0_adv) += trace[0].adapted_form.margin / seeds;
      bool mono = true;
      for (int k = 1; k <= iters; ++k)
        if (trace[k].adapted_form.margin >
            trace[k - 1].adapted_form.margin +
                1e-12 * (1.0 + std::abs(trace[k - 1].adapted_form.margin)))
          mono = false;
      ++total;
      if (mono) ++monotone;
    }
  }
  std::ostringstream d;
  d << "margin@0 gauss " << mean0_gauss << " vs adv " << mean0_adv << "; monotone " << monotone
    << "/" << total;
  report(12, mean0_gauss > mean0_adv && monotone * 10 >= total * 9,
         "fig 2 qualitative (gap traces)", d.str(), timer.seconds());
}

void criterion13() {
  Timer timer;
  fs::path base = fs::temp_directory_path() / "sclab_acceptance_det";
  fs::remove_all(base);

  ExperimentConfig gap_cfg;
  gap_cfg.n = 16;
  gap_cfg.m = 32;
  gap_cfg.gap_iters = 20;
  gap_cfg.gap_seeds = 3;
  gap_cfg.seed = 7;
  bool ok = true;

  gap_cfg.output_dir = (base / "gap_a").string();
  run_fig_gap(gap_cfg);
  gap_cfg.output_dir = (base / "gap_b").string();
  run_fig_gap(gap_cfg);
  ok = ok && slurp(base / "gap_a" / "gap_gaussian.csv") == slurp(base / "gap_b" / "gap_gaussian.csv");
  ok = ok &&
       slurp(base / "gap_a" / "gap_adversarial.csv") == slurp(base / "gap_b" / "gap_adversarial.csv");

  ExperimentConfig mc_cfg;
  mc_cfg.seed = 42;
  mc_cfg.mc_trials = 200;
  mc_cfg.output_dir = (base / "mc_a").string();
  run_mc_verify(mc_cfg);
  mc_cfg.output_dir = (base / "mc_b").string();
  run_mc_verify(mc_cfg);
  ok = ok && slurp(base / "mc_a" / "mc_reports.csv") == slurp(base / "mc_b" / "mc_reports.csv");

  ExperimentConfig fig_cfg;
  fig_cfg.n = 16;
  fig_cfg.m = 32;
  fig_cfg.depths = {1};
  fig_cfg.test_samples = 20;
  fig_cfg.train.steps = 25;
  fig_cfg.train.batch_size = 16;
  fig_cfg.train.eval_every = 25;
  fig_cfg.seed = 11;
  Dictionary dict = sample_gaussian_dictionary(16, 32, 11);
  auto ra = run_depth_comparison(dict, fig_cfg, fig_cfg.rho, {NetKind::lista}, base / "fig_a");
  auto rb = run_depth_comparison(dict, fig_cfg, fig_cfg.rho, {NetKind::lista}, base / "fig_b");
  ok = ok && slurp(base / "fig_a" / "results.csv") == slurp(base / "fig_b" / "results.csv") &&
       !slurp(base / "fig_a" / "results.csv").empty();

  report(13, ok, "rerun determinism (byte-identical csv)", "gap/mc/depth-comparison reruns",
         timer.seconds());
}

}  // namespace

int main() {
  Timer total;
  std::printf("acceptance suite\n");
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();
  criterion12();
  criterion13();
  std::printf("%d/13 criteria passed in %.1fs\n", 13 - g_failures, total.seconds());
  return g_failures;
}
