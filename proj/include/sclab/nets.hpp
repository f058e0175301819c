#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "sclab/lasso.hpp"

namespace sclab {

// ---------------------------------------------------------------------------
// Parameters. Gradients and Adagrad accumulators reuse the same shapes.
// ---------------------------------------------------------------------------

struct ListaLayer {
  MatrixXd Wg;     // m×m
  MatrixXd We;     // m×n
  VectorXd theta;  // m, >= 0
};
struct ListaParams {
  std::vector<ListaLayer> layers;
  int code_dim = 0;  // m, needed when layers is empty
  int depth() const { return static_cast<int>(layers.size()); }
};

struct LfistaLayer {
  MatrixXd Wg, Wm;  // m×m
  MatrixXd We;      // m×n
  VectorXd theta;
};
struct LfistaParams {
  std::vector<LfistaLayer> layers;
  int code_dim = 0;
  int depth() const { return static_cast<int>(layers.size()); }
};

// S is kept positive by multiplicative (log-space) Adagrad updates; the
// gradient entries for S are in log-space.
struct FacnetLayer {
  MatrixXd A;  // m×m, intended unitary
  VectorXd S;  // m, > 0
};
struct FacnetParams {
  std::vector<FacnetLayer> layers;
  double mu = 1.0;  // unitarity penalty weight
  int code_dim = 0;
  int depth() const { return static_cast<int>(layers.size()); }
};

/// ISTA weights: Wg = I − B/L, We = Dᵀ/L, θ = λ/L.
ListaParams lista_init(const DictOps& ops, double lambda, int K);
/// FISTA weights (two memory taps, momentum sequence t_k folded in).
LfistaParams lfista_init(const DictOps& ops, double lambda, int K);
/// A = I, S = L·1 per layer.
FacnetParams facnet_init(const DictOps& ops, double lambda, int K, double mu = 1.0);

// ---------------------------------------------------------------------------
// Forward passes (single sample; z_0 = 0). iterates, when requested, holds
// z_0..z_K.
// ---------------------------------------------------------------------------

VectorXd lista_forward(const ListaParams& params, const VectorXd& x,
                       std::vector<VectorXd>* iterates = nullptr);
VectorXd lfista_forward(const LfistaParams& params, const VectorXd& x,
                        std::vector<VectorXd>* iterates = nullptr);
VectorXd facnet_forward(const FacnetParams& params, const MatrixXd& B, const VectorXd& dtx,
                        double lambda, std::vector<VectorXd>* iterates = nullptr);
VectorXd facnet_forward(const FacnetParams& params, const LassoProblem& p,
                        std::vector<VectorXd>* iterates = nullptr);

// ---------------------------------------------------------------------------
// Loss and exact reverse-mode gradients over a batch (columns of X).
// ---------------------------------------------------------------------------

struct NetContext {
  std::shared_ptr<const DictOps> ops;
  double lambda = 0;
};

double net_loss(const ListaParams& params, const NetContext& ctx, const MatrixXd& X);
double net_loss(const LfistaParams& params, const NetContext& ctx, const MatrixXd& X);
/// FacNet loss adds (μ/K) Σ_k ‖I − A_kᵀA_k‖_F².
double net_loss(const FacnetParams& params, const NetContext& ctx, const MatrixXd& X);

/// Each returns the loss and fills grads (same shapes as params).
double net_backward(const ListaParams& params, const NetContext& ctx, const MatrixXd& X,
                    ListaParams& grads);
double net_backward(const LfistaParams& params, const NetContext& ctx, const MatrixXd& X,
                    LfistaParams& grads);
double net_backward(const FacnetParams& params, const NetContext& ctx, const MatrixXd& X,
                    FacnetParams& grads);

// ---------------------------------------------------------------------------
// Adagrad: G += g², p −= lr·g/(√G + eps). θ is clamped to >= 0 afterwards;
// FacNet S is updated multiplicatively in log-space.
// ---------------------------------------------------------------------------

void adagrad_step(ListaParams& params, const ListaParams& grads, ListaParams& state, double lr,
                  double eps);
void adagrad_step(LfistaParams& params, const LfistaParams& grads, LfistaParams& state, double lr,
                  double eps);
void adagrad_step(FacnetParams& params, const FacnetParams& grads, FacnetParams& state, double lr,
                  double eps);

/// Scalar core, exposed for tests: returns the update applied to p.
double adagrad_scalar_step(double& p, double g, double& accum, double lr, double eps);

/// Nearest orthogonal matrix UVᵀ from the SVD. Throws if a singular value is
/// below 1e-12 (rank-deficient).
MatrixXd stiefel_project(const MatrixXd& A);
void stiefel_project_in_place(FacnetParams& params);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
  int steps = 50000;
  int batch_size = 500;
  double learning_rate = 0.01;
  double adagrad_epsilon = 1e-8;
  std::uint64_t seed = 0;
  int eval_every = 250;
  int test_samples = 1000;
  double mu = 1.0;  // FacNet unitarity penalty weight
  bool keep_best = true;  // return the best checkpoint seen on the test set
  bool greedy = false;    // layer-wise warm start instead of joint training
};

/// Fixed held-out test set with per-sample optimal costs.
struct EvalSet {
  std::shared_ptr<const DictOps> ops;
  double lambda = 0;
  MatrixXd X;    // n×N
  MatrixXd DtX;  // m×N
  std::vector<double> f_star;
};

EvalSet make_eval_set(std::shared_ptr<const DictOps> ops, MatrixXd X, double lambda,
                      double ref_tol = 1e-11);

double mean_test_gap(const ListaParams& params, const EvalSet& eval);
double mean_test_gap(const LfistaParams& params, const EvalSet& eval);
double mean_test_gap(const FacnetParams& params, const EvalSet& eval);

enum class NetKind { lista, lfista, facnet };
std::string net_kind_name(NetKind k);
NetKind net_kind_from_name(const std::string& name);

struct CurvePoint {
  int step;
  double train_loss;
  double test_cost_gap;
};

struct TrainedNet {
  NetKind kind = NetKind::lista;
  ListaParams lista;
  LfistaParams lfista;
  FacnetParams facnet;
  std::vector<CurvePoint> curve;
  double test_gap = 0;  // gap of the returned parameters
  int depth = 0;
};

/// Adagrad training from the classical initialization on fresh
/// Bernoulli-Gaussian batches. FacNet parameters are projected to the Stiefel
/// manifold before evaluation and in the returned model. Throws on divergence.
TrainedNet train(NetKind kind, const BernoulliGaussianModel& generator,
                 std::shared_ptr<const DictOps> ops, double lambda, int depth,
                 const TrainConfig& config, const EvalSet* eval = nullptr);

double mean_test_gap(const TrainedNet& net, const EvalSet& eval);

/// Per-sample F(net(x)) − F* via the single-sample forward kernels.
std::vector<double> per_sample_gaps(const TrainedNet& net, const EvalSet& eval);

struct DepthCurvePoint {
  int depth = 0;
  double mean_gap = 0;
  double std_error = 0;
  int n_samples = 0;
};

/// Mean cost gap per depth for nets trained at each depth.
std::vector<DepthCurvePoint> evaluate_depth_curve(const std::vector<TrainedNet>& models_by_depth,
                                                  const EvalSet& eval);
/// Same table for a classic solver, depth = iteration count.
std::vector<DepthCurvePoint> solver_depth_curve(bool use_fista, const EvalSet& eval,
                                                const std::vector<int>& depths);

void save_net(const std::filesystem::path& dir, const TrainedNet& net);
TrainedNet load_net(const std::filesystem::path& dir);

/// CSV: step,train_loss,test_cost_gap.
std::string curve_to_csv(const std::vector<CurvePoint>& curve);

}  // namespace sclab
