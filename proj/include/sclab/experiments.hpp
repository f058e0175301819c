#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sclab/generic_gap.hpp"
#include "sclab/lasso.hpp"
#include "sclab/nets.hpp"
#include "sclab/solvers.hpp"

namespace sclab {

/// Desk-scale defaults; full-scale variants live in configs/ as documentation.
struct ExperimentConfig {
  std::string experiment = "custom";  // fig_layers | fig_adverse | fig_gap | mc_verify | custom
  int n = 64;
  int m = 100;
  double rho = 0.05;
  double sigma = 10.0;
  double lambda = 0.01;
  std::vector<int> depths = {1, 2, 4, 7};
  TrainConfig train{.steps = 1500,
                    .batch_size = 200,
                    .learning_rate = 0.05,
                    .adagrad_epsilon = 1e-8,
                    .seed = 0,
                    .eval_every = 100,
                    .test_samples = 500};
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int test_samples = 500;
  // fig_gap
  int gap_iters = 300;
  int gap_seeds = 50;
  // mc_verify
  int mc_trials = 2000;

  static ExperimentConfig from_json_file(const std::filesystem::path& path);
  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json() const;
  void validate() const;
};

struct ResultRow {
  std::string method;
  int depth = 0;
  double mean_cost_gap = 0;
  double std_error = 0;
  int n_samples = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::string to_csv() const;
};

/// Mean/stderr of F(z_depth) − F* per method and depth on one dictionary.
/// Solver rows (ista, fista, linear) at every depth in `depths` plus 0;
/// learned rows from freshly trained nets at each depth.
struct FigurePipelineResult {
  ResultTable table;
  std::vector<TrainedNet> models;
};

FigurePipelineResult run_depth_comparison(const Dictionary& dict, const ExperimentConfig& cfg,
                                          double rho, const std::vector<NetKind>& kinds,
                                          const std::filesystem::path& out_dir);

/// Gaussian dictionary at both sparsity levels (ρ = 1/20 and 1/4).
ResultTable run_fig_layers(const ExperimentConfig& cfg);
/// Adversarial Fourier dictionary, config sparsity.
ResultTable run_fig_adverse(const ExperimentConfig& cfg);

struct GapTraceSummary {
  std::vector<double> mean_margin_gaussian;  // theorem-form margin per iteration
  std::vector<double> mean_margin_adversarial;
  std::vector<double> mean_rhs_gaussian;
  std::vector<double> mean_rhs_adversarial;
  // margins under each dictionary's own off-diagonal Gram budget
  std::vector<double> mean_adapted_margin_gaussian;
  std::vector<double> mean_adapted_margin_adversarial;
};

GapTraceSummary run_fig_gap(const ExperimentConfig& cfg);

/// Bundled §3 MC checks at the acceptance sizes; writes reports and returns
/// them. all_within_tolerance(reports) decides the exit code.
std::vector<MCReport> run_mc_verify(const ExperimentConfig& cfg);
bool all_within_tolerance(const std::vector<MCReport>& reports);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sclab
