#include "sclab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sclab/matrix_io.hpp"
#include "sclab/rng.hpp"

namespace sclab {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

TrainConfig train_from_json(const json& j, TrainConfig base) {
  base.steps = j.value("steps", base.steps);
  base.batch_size = j.value("batch_size", base.batch_size);
  base.learning_rate = j.value("learning_rate", base.learning_rate);
  base.adagrad_epsilon = j.value("adagrad_epsilon", base.adagrad_epsilon);
  base.seed = j.value("seed", base.seed);
  base.eval_every = j.value("eval_every", base.eval_every);
  base.test_samples = j.value("test_samples", base.test_samples);
  base.mu = j.value("mu", base.mu);
  base.keep_best = j.value("keep_best", base.keep_best);
  base.greedy = j.value("greedy", base.greedy);
  return base;
}

json train_to_json(const TrainConfig& t) {
  json j;
  j["steps"] = t.steps;
  j["batch_size"] = t.batch_size;
  j["learning_rate"] = t.learning_rate;
  j["adagrad_epsilon"] = t.adagrad_epsilon;
  j["seed"] = t.seed;
  j["eval_every"] = t.eval_every;
  j["test_samples"] = t.test_samples;
  j["mu"] = t.mu;
  j["keep_best"] = t.keep_best;
  j["greedy"] = t.greedy;
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  ExperimentConfig c;
  c.experiment = j.value("experiment", c.experiment);
  c.n = j.value("n", c.n);
  c.m = j.value("m", c.m);
  c.rho = j.value("rho", c.rho);
  c.sigma = j.value("sigma", c.sigma);
  c.lambda = j.value("lambda", c.lambda);
  if (j.contains("depths")) c.depths = j["depths"].get<std::vector<int>>();
  if (j.contains("train")) c.train = train_from_json(j["train"], c.train);
  c.seed = j.value("seed", c.seed);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.test_samples = j.value("test_samples", c.test_samples);
  c.gap_iters = j.value("gap_iters", c.gap_iters);
  c.gap_seeds = j.value("gap_seeds", c.gap_seeds);
  c.mc_trials = j.value("mc_trials", c.mc_trials);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["n"] = n;
  j["m"] = m;
  j["rho"] = rho;
  j["sigma"] = sigma;
  j["lambda"] = lambda;
  j["depths"] = depths;
  j["train"] = train_to_json(train);
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["test_samples"] = test_samples;
  j["gap_iters"] = gap_iters;
  j["gap_seeds"] = gap_seeds;
  j["mc_trials"] = mc_trials;
  return j.dump(2);
}

void ExperimentConfig::validate() const {
  if (n < 1 || m < 1) throw std::invalid_argument("config: dimensions must be positive");
  if (!std::is_sorted(depths.begin(), depths.end()))
    throw std::invalid_argument("config: depths must be sorted ascending");
  if (!depths.empty() && depths.front() < 0)
    throw std::invalid_argument("config: depths must be >= 0");
  if (test_samples < 1 || gap_iters < 1 || gap_seeds < 1 || mc_trials < 100)
    throw std::invalid_argument("config: sample counts out of range");
}

std::string ResultTable::to_csv() const {
  std::ostringstream out;
  out << "method,depth,mean_cost_gap,std_error,n_samples\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.depth << ',' << format_double(r.mean_cost_gap) << ','
        << format_double(r.std_error) << ',' << r.n_samples << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Depth comparison pipeline
// ---------------------------------------------------------------------------

namespace {

ResultRow row_from_gaps(const std::string& method, int depth, const std::vector<double>& gaps) {
  double sum = 0;
  for (double g : gaps) sum += g;
  double mean = sum / double(gaps.size());
  double var = 0;
  for (double g : gaps) var += (g - mean) * (g - mean);
  var = gaps.size() > 1 ? var / double(gaps.size() - 1) : 0.0;
  return {method, depth, mean, std::sqrt(var / double(gaps.size())), int(gaps.size())};
}

}  // namespace

FigurePipelineResult run_depth_comparison(const Dictionary& dict, const ExperimentConfig& cfg,
                                          double rho, const std::vector<NetKind>& kinds,
                                          const fs::path& out_dir) {
  fs::create_directories(out_dir);
  auto ops = make_dict_ops(dict);
  const int m = static_cast<int>(dict.m());
  BernoulliGaussianModel model{rho, cfg.sigma, m};

  MatrixXd Xtest =
      dict.entries * sample_codes(model, cfg.test_samples, derive_seed(cfg.seed, 7777));
  EvalSet eval = make_eval_set(ops, std::move(Xtest), cfg.lambda);
  const int N = static_cast<int>(eval.X.cols());

  std::vector<int> depths = cfg.depths;
  if (depths.empty() || depths.front() != 0) depths.insert(depths.begin(), 0);
  const int maxd = depths.back();

  // classic solvers, per-sample traces
  std::vector<std::vector<double>> ista_gaps(maxd + 1, std::vector<double>(N));
  std::vector<std::vector<double>> fista_gaps(maxd + 1, std::vector<double>(N));
  for (int j = 0; j < N; ++j) {
    LassoProblem p = build_problem(ops, eval.X.col(j), cfg.lambda);
    SolverTrace ti = ista(p, VectorXd::Zero(m), maxd, false);
    SolverTrace tf = fista(p, VectorXd::Zero(m), maxd, false);
    for (int k = 0; k <= maxd; ++k) {
      ista_gaps[k][j] = ti.costs[k] - eval.f_star[j];
      fista_gaps[k][j] = tf.costs[k] - eval.f_star[j];
    }
  }

  // linear warm-start baseline: depth k >= 1 is k−1 ISTA iterations from A⁰x
  Dataset train_data = sample_dataset(dict, model, 4000, derive_seed(cfg.seed, 8888));
  SgdConfig sgd;
  sgd.seed = derive_seed(cfg.seed, 8889);
  sgd.steps = std::max(20000, 4 * cfg.train.steps);
  sgd.eval_every = 1000;
  sgd.learning_rate = 0.02;
  LinearBaseline lin = train_linear_baseline(train_data.X, dict, cfg.lambda, sgd).baseline;
  std::vector<std::vector<double>> linear_gaps(maxd + 1, std::vector<double>(N));
  for (int j = 0; j < N; ++j) {
    LassoProblem p = build_problem(ops, eval.X.col(j), cfg.lambda);
    linear_gaps[0][j] = ista_gaps[0][j];
    if (maxd >= 1) {
      SolverTrace t = warm_started_ista(p, lin, maxd - 1);
      for (int k = 1; k <= maxd; ++k) linear_gaps[k][j] = t.costs[k - 1] - eval.f_star[j];
    }
  }

  FigurePipelineResult out;
  for (int d : depths) out.table.rows.push_back(row_from_gaps("ista", d, ista_gaps[d]));
  for (int d : depths) out.table.rows.push_back(row_from_gaps("fista", d, fista_gaps[d]));
  for (int d : depths) out.table.rows.push_back(row_from_gaps("linear", d, linear_gaps[d]));

  int kind_idx = 0;
  for (NetKind kind : kinds) {
    for (int d : depths) {
      if (d == 0) {
        out.table.rows.push_back(row_from_gaps(net_kind_name(kind), 0, ista_gaps[0]));
        continue;
      }
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cfg.train.seed != 0 ? cfg.train.seed : cfg.seed,
                            1000u * (kind_idx + 1) + static_cast<unsigned>(d));
      TrainedNet net = train(kind, model, ops, cfg.lambda, d, tc, &eval);
      out.table.rows.push_back(row_from_gaps(net_kind_name(kind), d, per_sample_gaps(net, eval)));
      save_net(out_dir / "models" / (net_kind_name(kind) + "_d" + std::to_string(d)), net);
      out.models.push_back(std::move(net));
    }
    ++kind_idx;
  }

  write_text_file(out_dir / "results.csv", out.table.to_csv());
  return out;
}

ResultTable run_fig_layers(const ExperimentConfig& cfg) {
  fs::path out_dir = cfg.output_dir;
  fs::create_directories(out_dir);
  write_text_file(out_dir / "config.resolved.json", cfg.to_json() + "\n");
  Dictionary dict = sample_gaussian_dictionary(cfg.n, cfg.m, cfg.seed);
  std::vector<NetKind> kinds = {NetKind::lista, NetKind::lfista, NetKind::facnet};

  ResultTable first;
  for (double rho : {1.0 / 20.0, 1.0 / 4.0}) {
    std::ostringstream tag;
    tag << "rho_" << rho;
    auto res = run_depth_comparison(dict, cfg, rho, kinds, out_dir / tag.str());
    if (first.rows.empty()) first = std::move(res.table);
  }
  return first;
}

ResultTable run_fig_adverse(const ExperimentConfig& cfg) {
  fs::path out_dir = cfg.output_dir;
  fs::create_directories(out_dir);
  write_text_file(out_dir / "config.resolved.json", cfg.to_json() + "\n");
  Dictionary dict = adversarial_fourier_dictionary(cfg.n, cfg.m, cfg.seed);
  std::vector<NetKind> kinds = {NetKind::lista, NetKind::lfista, NetKind::facnet};
  return run_depth_comparison(dict, cfg, cfg.rho, kinds, out_dir).table;
}

// ---------------------------------------------------------------------------
// Gap traces (fig 2)
// ---------------------------------------------------------------------------

GapTraceSummary run_fig_gap(const ExperimentConfig& cfg) {
  fs::path out_dir = cfg.output_dir;
  fs::create_directories(out_dir);
  write_text_file(out_dir / "config.resolved.json", cfg.to_json() + "\n");

  GapTraceSummary summary;
  for (int kind = 0; kind < 2; ++kind) {
    bool gaussian = kind == 0;
    std::vector<double> margin(cfg.gap_iters + 1, 0.0), rhs(cfg.gap_iters + 1, 0.0),
        adapted(cfg.gap_iters + 1, 0.0);
    for (int s = 0; s < cfg.gap_seeds; ++s) {
      std::uint64_t ds = derive_seed(cfg.seed, 100 + s);
      Dictionary dict = gaussian ? sample_gaussian_dictionary(cfg.n, cfg.m, ds)
                                 : adversarial_fourier_dictionary(cfg.n, cfg.m, ds);
      BernoulliGaussianModel model{cfg.rho, cfg.sigma, cfg.m};
      Dataset data = sample_dataset(dict, model, 1, derive_seed(ds, 1));
      LassoProblem p = build_problem(dict, data.X.col(0), cfg.lambda);
      auto trace = gap_trace(p, cfg.gap_iters, VectorXd::Zero(cfg.m), reference_solution(p, 1e-11));
      for (int k = 0; k <= cfg.gap_iters; ++k) {
        margin[k] += trace[k].theorem_form.margin / cfg.gap_seeds;
        rhs[k] += trace[k].theorem_form.rhs / cfg.gap_seeds;
        adapted[k] += trace[k].adapted_form.margin / cfg.gap_seeds;
      }
    }
    std::ostringstream csv;
    csv << "iteration,mean_margin,mean_rhs,mean_adapted_margin\n";
    for (int k = 0; k <= cfg.gap_iters; ++k)
      csv << k << ',' << format_double(margin[k]) << ',' << format_double(rhs[k]) << ','
          << format_double(adapted[k]) << '\n';
    write_text_file(out_dir / (gaussian ? "gap_gaussian.csv" : "gap_adversarial.csv"), csv.str());
    if (gaussian) {
      summary.mean_margin_gaussian = std::move(margin);
      summary.mean_rhs_gaussian = std::move(rhs);
      summary.mean_adapted_margin_gaussian = std::move(adapted);
    } else {
      summary.mean_margin_adversarial = std::move(margin);
      summary.mean_rhs_adversarial = std::move(rhs);
      summary.mean_adapted_margin_adversarial = std::move(adapted);
    }
  }
  return summary;
}

// ---------------------------------------------------------------------------
// MC verification bundle
// ---------------------------------------------------------------------------

std::vector<MCReport> run_mc_verify(const ExperimentConfig& cfg) {
  fs::path out_dir = cfg.output_dir;
  fs::create_directories(out_dir);
  write_text_file(out_dir / "config.resolved.json", cfg.to_json() + "\n");

  std::vector<MCReport> reports;
  reports.push_back(mc_wishart_frobenius(20, 10, cfg.mc_trials, cfg.seed));

  for (auto [K, p] : {std::pair{10, 20}, std::pair{30, 50}}) {
    auto chi = mc_chi_moment(K, p, 5000, derive_seed(cfg.seed, 10 + K));
    reports.push_back(chi.first_moment);
    reports.push_back(chi.second_moment);
  }

  Lemma1Slope slope = mc_lemma1_slope(20, 10, cfg.mc_trials, derive_seed(cfg.seed, 21));
  reports.push_back(slope.anchor);
  MCReport sr;
  sr.name = "lemma1_slope";
  sr.estimate = slope.slope;
  sr.std_error = slope.slope_stderr;
  sr.reference = slope.reference;
  sr.trials = cfg.mc_trials;
  sr.K = 20;
  sr.p = 10;
  sr.seed = derive_seed(cfg.seed, 21);
  sr.within_tolerance = slope.within_25pct;
  reports.push_back(sr);

  BernoulliGaussianModel normal_codes{1.0, 1.0, 50};
  for (double d : {0.01, 0.05})
    reports.push_back(
        mc_lemma2(50, d, 5000, normal_codes, derive_seed(cfg.seed, 31 + int(d * 100))));

  {
    const int K = 50, draws = 100;
    const double delta = 0.01;
    double acc = 0;
    for (int t = 0; t < draws; ++t)
      acc += e_delta_unitarity_check(sample_e_delta(K, delta, derive_seed(cfg.seed, 41 + t))) /
             (2.0 * delta * std::sqrt(double(K)));
    MCReport ur;
    ur.name = "e_delta_unitarity_ratio";
    ur.estimate = acc / draws;
    ur.reference = 1.0;
    ur.trials = draws;
    ur.K = K;
    ur.delta = delta;
    ur.seed = cfg.seed;
    ur.within_tolerance = ur.estimate >= 0.0 && ur.estimate <= 1.2;
    reports.push_back(ur);
  }

  write_text_file(out_dir / "mc_reports.csv", mc_reports_to_csv(reports));
  std::ostringstream js;
  js << "[\n";
  for (size_t i = 0; i < reports.size(); ++i)
    js << reports[i].to_json() << (i + 1 < reports.size() ? ",\n" : "\n");
  js << "]\n";
  write_text_file(out_dir / "mc_reports.json", js.str());
  return reports;
}

bool all_within_tolerance(const std::vector<MCReport>& reports) {
  for (const auto& r : reports)
    if (!r.within_tolerance) return false;
  return true;
}

}  // namespace sclab
