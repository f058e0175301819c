// Command-line driver for the sparse coding optimization lab.
//
// Subcommands: gen-dict, gen-data, solve, train, eval, gap, mc-verify,
// fig-layers, fig-adverse, fig-gap. Exit codes: 0 success, 1 runtime error,
// 2 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sclab/experiments.hpp"
#include "sclab/factorization.hpp"
#include "sclab/generic_gap.hpp"
#include "sclab/matrix_io.hpp"
#include "sclab/nets.hpp"
#include "sclab/rng.hpp"
#include "sclab/solvers.hpp"

namespace fs = std::filesystem;
using namespace sclab;

namespace {

Dictionary load_dictionary(const std::string& path) {
  MatrixXd D = load_matrix(path);
  return make_dictionary(std::move(D));
}

void save_dataset(const fs::path& dir, const Dictionary& dict, const Dataset& data,
                  const BernoulliGaussianModel& model, double lambda, std::uint64_t seed) {
  fs::create_directories(dir);
  save_matrix(dir / "D.mat", dict.entries);
  save_matrix(dir / "X.mat", data.X);
  save_matrix(dir / "Z_true.mat", data.Z);
  nlohmann::json meta;
  meta["kind"] = dict.kind == DictKind::gaussian ? "gaussian"
                 : dict.kind == DictKind::fourier_adversarial ? "fourier_adversarial"
                                                              : "user_supplied";
  meta["n"] = dict.n();
  meta["m"] = dict.m();
  meta["rho"] = model.rho;
  meta["sigma"] = model.sigma;
  meta["lambda"] = lambda;
  meta["seed"] = seed;
  write_text_file(dir / "metadata.json", meta.dump(2) + "\n");
}

int run_solve(const std::string& dict_path, const std::string& data_path, double lambda,
              const std::string& method, int iters, const std::string& out_dir) {
  Dictionary dict = load_dictionary(dict_path);
  MatrixXd X = load_matrix(data_path);
  if (X.rows() != dict.n()) throw std::runtime_error("data rows != dictionary signal dimension");
  auto ops = make_dict_ops(dict);
  fs::create_directories(out_dir);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    LassoProblem p = build_problem(ops, X.col(j), lambda);
    double f_star = lasso_cost(p, reference_solution(p, 1e-11));
    SolverTrace t;
    if (method == "ista")
      t = ista(p, VectorXd::Zero(p.m()), iters, false);
    else if (method == "fista")
      t = fista(p, VectorXd::Zero(p.m()), iters, false);
    else
      throw std::invalid_argument("unknown method: " + method);
    std::ostringstream name;
    name << "trace_" << j << ".csv";
    write_text_file(fs::path(out_dir) / name.str(), trace_to_csv(t, f_star));
  }
  std::cout << "wrote " << X.cols() << " trace file(s) to " << out_dir << "\n";
  return 0;
}

ExperimentConfig config_from_flags(const std::optional<std::string>& config_file,
                                   const std::string& experiment, std::uint64_t seed,
                                   const std::optional<std::string>& out_dir) {
  ExperimentConfig cfg;
  if (config_file) cfg = ExperimentConfig::from_json_file(*config_file);
  cfg.experiment = experiment;
  if (seed != static_cast<std::uint64_t>(-1)) cfg.seed = seed;
  if (out_dir) cfg.output_dir = *out_dir;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse coding optimization lab"};
  app.require_subcommand(1);

  // gen-dict
  auto* gen_dict = app.add_subcommand("gen-dict", "generate a dictionary matrix file");
  std::string gd_kind = "gaussian", gd_out = "dict.mat";
  int gd_n = 64, gd_m = 100;
  std::uint64_t gd_seed = 0;
  gen_dict->add_option("--kind", gd_kind, "gaussian|fourier")
      ->check(CLI::IsMember({"gaussian", "fourier"}))
      ->capture_default_str();
  gen_dict->add_option("--n", gd_n)->capture_default_str();
  gen_dict->add_option("--m", gd_m)->capture_default_str();
  gen_dict->add_option("--seed", gd_seed)->capture_default_str();
  gen_dict->add_option("--out", gd_out)->capture_default_str();

  // gen-data
  auto* gen_data = app.add_subcommand("gen-data", "generate Bernoulli-Gaussian dataset files");
  std::string gdt_dict, gdt_out = "dataset";
  double gdt_rho = 0.05, gdt_sigma = 10.0, gdt_lambda = 0.01;
  int gdt_count = 100;
  std::uint64_t gdt_seed = 0;
  gen_data->add_option("--dict", gdt_dict, "dictionary matrix file")->required();
  gen_data->add_option("--rho", gdt_rho)->capture_default_str();
  gen_data->add_option("--sigma", gdt_sigma)->capture_default_str();
  gen_data->add_option("--lambda", gdt_lambda)->capture_default_str();
  gen_data->add_option("--count", gdt_count)->capture_default_str();
  gen_data->add_option("--seed", gdt_seed)->capture_default_str();
  gen_data->add_option("--out", gdt_out, "output directory")->capture_default_str();

  // solve
  auto* solve = app.add_subcommand("solve", "run ISTA/FISTA and write trace CSVs");
  std::string sv_dict, sv_data, sv_method = "fista", sv_out = "solve_out";
  double sv_lambda = 0.01;
  int sv_iters = 100;
  solve->add_option("--dict", sv_dict)->required();
  solve->add_option("--data", sv_data, "matrix file, samples as columns")->required();
  solve->add_option("--lambda", sv_lambda)->capture_default_str();
  solve->add_option("--method", sv_method, "ista|fista")
      ->check(CLI::IsMember({"ista", "fista"}))
      ->capture_default_str();
  solve->add_option("--iters", sv_iters)->capture_default_str();
  solve->add_option("--output-dir", sv_out)->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "train an unrolled network");
  std::string tr_dict, tr_kind = "lista", tr_out = "model";
  double tr_rho = 0.05, tr_sigma = 10.0, tr_lambda = 0.01;
  int tr_depth = 4;
  TrainConfig tr_cfg;
  tr_cfg.steps = 1500;
  tr_cfg.batch_size = 200;
  tr_cfg.learning_rate = 0.05;
  tr_cfg.eval_every = 100;
  tr_cfg.test_samples = 500;
  train_cmd->add_option("--dict", tr_dict)->required();
  train_cmd->add_option("--kind", tr_kind, "lista|lfista|facnet")
      ->check(CLI::IsMember({"lista", "lfista", "facnet"}))
      ->capture_default_str();
  train_cmd->add_option("--depth", tr_depth)->capture_default_str();
  train_cmd->add_option("--rho", tr_rho)->capture_default_str();
  train_cmd->add_option("--sigma", tr_sigma)->capture_default_str();
  train_cmd->add_option("--lambda", tr_lambda)->capture_default_str();
  train_cmd->add_option("--steps", tr_cfg.steps)->capture_default_str();
  train_cmd->add_option("--batch-size", tr_cfg.batch_size)->capture_default_str();
  train_cmd->add_option("--learning-rate", tr_cfg.learning_rate)->capture_default_str();
  train_cmd->add_option("--eval-every", tr_cfg.eval_every)->capture_default_str();
  train_cmd->add_option("--test-samples", tr_cfg.test_samples)->capture_default_str();
  train_cmd->add_option("--mu", tr_cfg.mu, "FacNet unitarity penalty")->capture_default_str();
  train_cmd->add_option("--seed", tr_cfg.seed)->capture_default_str();
  train_cmd->add_flag("--greedy", tr_cfg.greedy, "layer-wise warm-start training");
  train_cmd->add_option("--output-dir", tr_out)->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved model on a dataset");
  std::string ev_model, ev_dict, ev_data;
  double ev_lambda = 0.01;
  eval_cmd->add_option("--model", ev_model)->required();
  eval_cmd->add_option("--dict", ev_dict)->required();
  eval_cmd->add_option("--data", ev_data)->required();
  eval_cmd->add_option("--lambda", ev_lambda)->capture_default_str();

  // gap
  auto* gap_cmd = app.add_subcommand("gap", "gap-condition trace for one problem");
  std::string gp_dict, gp_out = "gap.csv";
  double gp_rho = 0.05, gp_sigma = 10.0, gp_lambda = 0.01;
  int gp_iters = 300;
  std::uint64_t gp_seed = 0;
  gap_cmd->add_option("--dict", gp_dict, "dictionary matrix file")->required();
  gap_cmd->add_option("--rho", gp_rho)->capture_default_str();
  gap_cmd->add_option("--sigma", gp_sigma)->capture_default_str();
  gap_cmd->add_option("--lambda", gp_lambda)->capture_default_str();
  gap_cmd->add_option("--iters", gp_iters)->capture_default_str();
  gap_cmd->add_option("--seed", gp_seed)->capture_default_str();
  gap_cmd->add_option("--out", gp_out)->capture_default_str();

  // experiment subcommands
  std::optional<std::string> xc_config, xc_out;
  std::uint64_t xc_seed = static_cast<std::uint64_t>(-1);
  auto add_experiment_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", xc_config, "JSON config file (flags override)");
    cmd->add_option("--seed", xc_seed);
    cmd->add_option("--output-dir", xc_out);
  };
  auto* mc_verify = app.add_subcommand("mc-verify", "Monte-Carlo verification of the random-matrix lemmas");
  auto* fig_layers = app.add_subcommand("fig-layers", "depth-vs-cost comparison, Gaussian dictionary");
  auto* fig_adverse = app.add_subcommand("fig-adverse", "depth-vs-cost comparison, adversarial dictionary");
  auto* fig_gap = app.add_subcommand("fig-gap", "gap-condition traces, Gaussian vs adversarial");
  for (auto* cmd : {mc_verify, fig_layers, fig_adverse, fig_gap}) add_experiment_flags(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (gen_dict->parsed()) {
      Dictionary d = gd_kind == "fourier" ? adversarial_fourier_dictionary(gd_n, gd_m, gd_seed)
                                          : sample_gaussian_dictionary(gd_n, gd_m, gd_seed);
      save_matrix(gd_out, d.entries);
      std::cout << "wrote " << gd_out << " (" << d.n() << "x" << d.m() << ")\n";
    } else if (gen_data->parsed()) {
      Dictionary dict = load_dictionary(gdt_dict);
      BernoulliGaussianModel model{gdt_rho, gdt_sigma, static_cast<int>(dict.m())};
      Dataset data = sample_dataset(dict, model, gdt_count, gdt_seed);
      save_dataset(gdt_out, dict, data, model, gdt_lambda, gdt_seed);
      std::cout << "wrote dataset to " << gdt_out << "\n";
    } else if (solve->parsed()) {
      return run_solve(sv_dict, sv_data, sv_lambda, sv_method, sv_iters, sv_out);
    } else if (train_cmd->parsed()) {
      Dictionary dict = load_dictionary(tr_dict);
      BernoulliGaussianModel model{tr_rho, tr_sigma, static_cast<int>(dict.m())};
      TrainedNet net = train(net_kind_from_name(tr_kind), model, make_dict_ops(dict), tr_lambda,
                             tr_depth, tr_cfg);
      save_net(tr_out, net);
      std::cout << "trained " << tr_kind << " depth " << tr_depth
                << ", test cost gap = " << format_double(net.test_gap) << ", saved to " << tr_out
                << "\n";
    } else if (eval_cmd->parsed()) {
      TrainedNet net = load_net(ev_model);
      Dictionary dict = load_dictionary(ev_dict);
      MatrixXd X = load_matrix(ev_data);
      EvalSet eval = make_eval_set(make_dict_ops(dict), std::move(X), ev_lambda);
      std::cout << "mean test cost gap = " << format_double(mean_test_gap(net, eval)) << "\n";
    } else if (gap_cmd->parsed()) {
      Dictionary dict = load_dictionary(gp_dict);
      BernoulliGaussianModel model{gp_rho, gp_sigma, static_cast<int>(dict.m())};
      Dataset data = sample_dataset(dict, model, 1, gp_seed);
      LassoProblem p = build_problem(dict, data.X.col(0), gp_lambda);
      auto trace = gap_trace(p, gp_iters);
      write_text_file(gp_out, gap_trace_to_csv(trace));
      std::cout << "wrote " << gp_out << "\n";
    } else if (mc_verify->parsed()) {
      ExperimentConfig cfg = config_from_flags(xc_config, "mc_verify", xc_seed, xc_out);
      auto reports = run_mc_verify(cfg);
      for (const auto& r : reports)
        std::cout << (r.within_tolerance ? "ok   " : "FAIL ") << r.name
                  << "  estimate=" << format_double(r.estimate)
                  << "  reference=" << format_double(r.reference)
                  << "  stderr=" << format_double(r.std_error) << "\n";
      if (!all_within_tolerance(reports)) {
        std::cerr << "mc-verify: tolerance failure\n";
        return 1;
      }
    } else if (fig_layers->parsed()) {
      ExperimentConfig cfg = config_from_flags(xc_config, "fig_layers", xc_seed, xc_out);
      run_fig_layers(cfg);
      std::cout << "wrote results under " << cfg.output_dir << "\n";
    } else if (fig_adverse->parsed()) {
      ExperimentConfig cfg = config_from_flags(xc_config, "fig_adverse", xc_seed, xc_out);
      run_fig_adverse(cfg);
      std::cout << "wrote results under " << cfg.output_dir << "\n";
    } else if (fig_gap->parsed()) {
      ExperimentConfig cfg = config_from_flags(xc_config, "fig_gap", xc_seed, xc_out);
      cfg.n = xc_config ? cfg.n : 16;
      cfg.m = xc_config ? cfg.m : 32;
      run_fig_gap(cfg);
      std::cout << "wrote gap traces under " << cfg.output_dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
