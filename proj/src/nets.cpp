#include "sclab/nets.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sclab/factorization.hpp"
#include "sclab/matrix_io.hpp"
#include "sclab/rng.hpp"
#include "sclab/solvers.hpp"

namespace sclab {

namespace {

MatrixXd ista_gain(const DictOps& ops) {
  return MatrixXd::Identity(ops.B.rows(), ops.B.cols()) - ops.B / ops.L;
}

// h_theta columnwise with per-row thresholds
MatrixXd soft_threshold_cols(const MatrixXd& U, const VectorXd& theta) {
  Eigen::ArrayXXd mag = (U.array().abs().colwise() - theta.array()).max(0.0);
  return (mag * U.array().sign()).matrix();
}

MatrixXd active_mask(const MatrixXd& U, const VectorXd& theta) {
  return ((U.array().abs().colwise() - theta.array()) > 0.0).cast<double>().matrix();
}

double mean_lasso_cost_cols(const DictOps& ops, double lambda, const MatrixXd& X,
                            const MatrixXd& Z) {
  MatrixXd R = X - ops.dict.entries * Z;
  double c = 0.5 * R.colwise().squaredNorm().sum() + lambda * Z.cwiseAbs().sum();
  return c / double(X.cols());
}

MatrixXd loss_adjoint(const DictOps& ops, double lambda, const MatrixXd& X, const MatrixXd& ZK) {
  const double invN = 1.0 / double(X.cols());
  MatrixXd G = ops.dict.entries.transpose() * (ops.dict.entries * ZK - X);
  G.array() += lambda * ZK.array().sign();
  return invN * G;
}

}  // namespace

// ---------------------------------------------------------------------------
// Initializations
// ---------------------------------------------------------------------------

ListaParams lista_init(const DictOps& ops, double lambda, int K) {
  if (K < 0) throw std::invalid_argument("lista_init: K must be >= 0");
  ListaParams p;
  p.code_dim = static_cast<int>(ops.B.rows());
  MatrixXd Wg = ista_gain(ops);
  MatrixXd We = ops.dict.entries.transpose() / ops.L;
  VectorXd theta = VectorXd::Constant(ops.B.rows(), lambda / ops.L);
  for (int k = 0; k < K; ++k) p.layers.push_back({Wg, We, theta});
  return p;
}

LfistaParams lfista_init(const DictOps& ops, double lambda, int K) {
  if (K < 0) throw std::invalid_argument("lfista_init: K must be >= 0");
  LfistaParams p;
  p.code_dim = static_cast<int>(ops.B.rows());
  MatrixXd G = ista_gain(ops);
  MatrixXd We = ops.dict.entries.transpose() / ops.L;
  VectorXd theta = VectorXd::Constant(ops.B.rows(), lambda / ops.L);
  double t_prev = 1.0, t_cur = 1.0;  // t_{-1} = t_0 = 1
  for (int k = 0; k < K; ++k) {
    double c1 = 1.0 + (t_prev - 1.0) / t_cur;
    double c2 = (1.0 - t_prev) / t_cur;
    p.layers.push_back({c1 * G, c2 * G, We, theta});
    t_prev = t_cur;
    t_cur = (1.0 + std::sqrt(1.0 + 4.0 * t_cur * t_cur)) / 2.0;
  }
  return p;
}

FacnetParams facnet_init(const DictOps& ops, double lambda, int K, double mu) {
  (void)lambda;
  if (K < 0) throw std::invalid_argument("facnet_init: K must be >= 0");
  FacnetParams p;
  p.mu = mu;
  p.code_dim = static_cast<int>(ops.B.rows());
  const Eigen::Index m = ops.B.rows();
  for (int k = 0; k < K; ++k)
    p.layers.push_back({MatrixXd::Identity(m, m), VectorXd::Constant(m, ops.L)});
  return p;
}

// ---------------------------------------------------------------------------
// Single-sample forwards
// ---------------------------------------------------------------------------

VectorXd lista_forward(const ListaParams& params, const VectorXd& x,
                       std::vector<VectorXd>* iterates) {
  Eigen::Index m = params.layers.empty() ? params.code_dim : params.layers[0].Wg.rows();
  VectorXd z = VectorXd::Zero(m);
  if (iterates) {
    iterates->clear();
    iterates->push_back(z);
  }
  for (const auto& l : params.layers) {
    z = soft_threshold(l.Wg * z + l.We * x, l.theta);
    if (iterates) iterates->push_back(z);
  }
  return z;
}

VectorXd lfista_forward(const LfistaParams& params, const VectorXd& x,
                        std::vector<VectorXd>* iterates) {
  Eigen::Index m = params.layers.empty() ? params.code_dim : params.layers[0].Wg.rows();
  VectorXd z = VectorXd::Zero(m), z_prev = VectorXd::Zero(m);
  if (iterates) {
    iterates->clear();
    iterates->push_back(z);
  }
  for (const auto& l : params.layers) {
    VectorXd z_next = soft_threshold(l.Wg * z + l.Wm * z_prev + l.We * x, l.theta);
    z_prev = z;
    z = z_next;
    if (iterates) iterates->push_back(z);
  }
  return z;
}

VectorXd facnet_forward(const FacnetParams& params, const MatrixXd& B, const VectorXd& dtx,
                        double lambda, std::vector<VectorXd>* iterates) {
  VectorXd z = VectorXd::Zero(B.rows());
  if (iterates) {
    iterates->clear();
    iterates->push_back(z);
  }
  for (const auto& l : params.layers) {
    z = factorized_step(B, dtx, lambda, z, l.A, l.S);
    if (iterates) iterates->push_back(z);
  }
  return z;
}

VectorXd facnet_forward(const FacnetParams& params, const LassoProblem& p,
                        std::vector<VectorXd>* iterates) {
  return facnet_forward(params, p.B(), p.dtx, p.lambda, iterates);
}

// ---------------------------------------------------------------------------
// Batched loss / backward
// ---------------------------------------------------------------------------

namespace {

MatrixXd lista_forward_cols(const ListaParams& params, const MatrixXd& X,
                            std::vector<MatrixXd>* Zs, std::vector<MatrixXd>* Us) {
  Eigen::Index m = params.layers.empty() ? params.code_dim : params.layers[0].Wg.rows();
  MatrixXd Z = MatrixXd::Zero(m, X.cols());
  if (Zs) Zs->push_back(Z);
  for (const auto& l : params.layers) {
    MatrixXd U = l.Wg * Z + l.We * X;
    Z = soft_threshold_cols(U, l.theta);
    if (Us) Us->push_back(std::move(U));
    if (Zs) Zs->push_back(Z);
  }
  return Z;
}

MatrixXd lfista_forward_cols(const LfistaParams& params, const MatrixXd& X,
                             std::vector<MatrixXd>* Zs, std::vector<MatrixXd>* Us) {
  Eigen::Index m = params.layers.empty() ? params.code_dim : params.layers[0].Wg.rows();
  MatrixXd Z = MatrixXd::Zero(m, X.cols()), Zp = MatrixXd::Zero(m, X.cols());
  if (Zs) Zs->push_back(Z);
  for (const auto& l : params.layers) {
    MatrixXd U = l.Wg * Z + l.Wm * Zp + l.We * X;
    Zp = Z;
    Z = soft_threshold_cols(U, l.theta);
    if (Us) Us->push_back(std::move(U));
    if (Zs) Zs->push_back(Z);
  }
  return Z;
}

struct FacnetLayerCache {
  MatrixXd g;   // B Z − DtX
  MatrixXd AG;  // A g
  MatrixXd V;   // pre-threshold
  MatrixXd W;   // post-threshold
};

MatrixXd facnet_forward_cols(const FacnetParams& params, const DictOps& ops, double lambda,
                             const MatrixXd& DtX, std::vector<MatrixXd>* Zs,
                             std::vector<FacnetLayerCache>* caches) {
  Eigen::Index m = ops.B.rows();
  MatrixXd Z = MatrixXd::Zero(m, DtX.cols());
  if (Zs) Zs->push_back(Z);
  for (const auto& l : params.layers) {
    FacnetLayerCache c;
    VectorXd invS = l.S.cwiseInverse();
    VectorXd thr = (lambda / l.S.array()).matrix();
    c.g = ops.B * Z - DtX;
    c.AG = l.A * c.g;
    c.V = l.A * Z - (c.AG.array().colwise() * invS.array()).matrix();
    c.W = soft_threshold_cols(c.V, thr);
    Z = l.A.transpose() * c.W;
    if (caches) caches->push_back(std::move(c));
    if (Zs) Zs->push_back(Z);
  }
  return Z;
}

double facnet_penalty(const FacnetParams& params) {
  if (params.layers.empty()) return 0.0;
  double acc = 0;
  const Eigen::Index m = params.layers[0].A.rows();
  for (const auto& l : params.layers)
    acc += (MatrixXd::Identity(m, m) - l.A.transpose() * l.A).squaredNorm();
  return params.mu / double(params.layers.size()) * acc;
}

}  // namespace

double net_loss(const ListaParams& params, const NetContext& ctx, const MatrixXd& X) {
  MatrixXd ZK = lista_forward_cols(params, X, nullptr, nullptr);
  return mean_lasso_cost_cols(*ctx.ops, ctx.lambda, X, ZK);
}

double net_loss(const LfistaParams& params, const NetContext& ctx, const MatrixXd& X) {
  MatrixXd ZK = lfista_forward_cols(params, X, nullptr, nullptr);
  return mean_lasso_cost_cols(*ctx.ops, ctx.lambda, X, ZK);
}

double net_loss(const FacnetParams& params, const NetContext& ctx, const MatrixXd& X) {
  MatrixXd DtX = ctx.ops->dict.entries.transpose() * X;
  MatrixXd ZK = facnet_forward_cols(params, *ctx.ops, ctx.lambda, DtX, nullptr, nullptr);
  return mean_lasso_cost_cols(*ctx.ops, ctx.lambda, X, ZK) + facnet_penalty(params);
}

double net_backward(const ListaParams& params, const NetContext& ctx, const MatrixXd& X,
                    ListaParams& grads) {
  const int K = params.depth();
  std::vector<MatrixXd> Zs, Us;
  MatrixXd ZK = lista_forward_cols(params, X, &Zs, &Us);
  double loss = mean_lasso_cost_cols(*ctx.ops, ctx.lambda, X, ZK);

  grads.layers.assign(K, {});
  MatrixXd GZ = loss_adjoint(*ctx.ops, ctx.lambda, X, ZK);
  for (int k = K - 1; k >= 0; --k) {
    const auto& l = params.layers[k];
    MatrixXd GU = (GZ.array() * active_mask(Us[k], l.theta).array()).matrix();
    grads.layers[k].Wg = GU * Zs[k].transpose();
    grads.layers[k].We = GU * X.transpose();
    grads.layers[k].theta = -(Us[k].array().sign() * GU.array()).rowwise().sum().matrix();
    GZ = l.Wg.transpose() * GU;
  }
  return loss;
}

double net_backward(const LfistaParams& params, const NetContext& ctx, const MatrixXd& X,
                    LfistaParams& grads) {
  const int K = params.depth();
  std::vector<MatrixXd> Zs, Us;
  MatrixXd ZK = lfista_forward_cols(params, X, &Zs, &Us);
  double loss = mean_lasso_cost_cols(*ctx.ops, ctx.lambda, X, ZK);

  grads.layers.assign(K, {});
  MatrixXd A = loss_adjoint(*ctx.ops, ctx.lambda, X, ZK);  // dL/dz_{k+1}
  MatrixXd P = MatrixXd::Zero(A.rows(), A.cols());         // memory-tap carry to dL/dz_k
  for (int k = K - 1; k >= 0; --k) {
    const auto& l = params.layers[k];
    MatrixXd GU = (A.array() * active_mask(Us[k], l.theta).array()).matrix();
    grads.layers[k].Wg = GU * Zs[k].transpose();
    grads.layers[k].Wm = k >= 1 ? MatrixXd(GU * Zs[k - 1].transpose())
                                : MatrixXd::Zero(l.Wm.rows(), l.Wm.cols());
    grads.layers[k].We = GU * X.transpose();
    grads.layers[k].theta = -(Us[k].array().sign() * GU.array()).rowwise().sum().matrix();
    A = l.Wg.transpose() * GU + P;
    P = l.Wm.transpose() * GU;
  }
  return loss;
}

double net_backward(const FacnetParams& params, const NetContext& ctx, const MatrixXd& X,
                    FacnetParams& grads) {
  const int K = params.depth();
  const DictOps& ops = *ctx.ops;
  MatrixXd DtX = ops.dict.entries.transpose() * X;
  std::vector<MatrixXd> Zs;
  std::vector<FacnetLayerCache> caches;
  MatrixXd ZK = facnet_forward_cols(params, ops, ctx.lambda, DtX, &Zs, &caches);
  double loss = mean_lasso_cost_cols(ops, ctx.lambda, X, ZK) + facnet_penalty(params);

  grads.layers.assign(K, {});
  grads.mu = 0;
  const Eigen::Index m = ops.B.rows();
  MatrixXd GZ = loss_adjoint(ops, ctx.lambda, X, ZK);
  for (int k = K - 1; k >= 0; --k) {
    const auto& l = params.layers[k];
    const auto& c = caches[k];
    VectorXd invS = l.S.cwiseInverse();
    VectorXd thr = (ctx.lambda / l.S.array()).matrix();

    MatrixXd GW = l.A * GZ;
    MatrixXd mask = active_mask(c.V, thr);
    MatrixXd GV = (GW.array() * mask.array()).matrix();
    // threshold path: t = λ/S
    VectorXd Gt = -(c.V.array().sign() * GV.array()).rowwise().sum().matrix();
    VectorXd GS = (Gt.array() * (-ctx.lambda) * invS.array().square()).matrix();
    // quadratic path: V = A z − (A g) ⊘ S
    VectorXd quad = (GV.array() * c.AG.array()).rowwise().sum().matrix();
    GS.array() += quad.array() * invS.array().square();
    MatrixXd GAG = -(GV.array().colwise() * invS.array()).matrix();
    MatrixXd Gg = l.A.transpose() * GAG;

    grads.layers[k].A = GV * Zs[k].transpose() + GAG * c.g.transpose() + c.W * GZ.transpose();
    grads.layers[k].A +=
        (4.0 * params.mu / double(K)) * l.A * (l.A.transpose() * l.A - MatrixXd::Identity(m, m));
    grads.layers[k].S = (l.S.array() * GS.array()).matrix();  // log-space gradient

    GZ = l.A.transpose() * GV + ops.B * Gg;
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Adagrad
// ---------------------------------------------------------------------------

double adagrad_scalar_step(double& p, double g, double& accum, double lr, double eps) {
  accum += g * g;
  double upd = -lr * g / (std::sqrt(accum) + eps);
  p += upd;
  return upd;
}

namespace {

template <class M>
void adagrad_array(M& p, const M& g, M& acc, double lr, double eps) {
  acc.array() += g.array().square();
  p.array() -= lr * g.array() / (acc.array().sqrt() + eps);
}

void zero_like(ListaLayer& s, const ListaLayer& l) {
  s.Wg = MatrixXd::Zero(l.Wg.rows(), l.Wg.cols());
  s.We = MatrixXd::Zero(l.We.rows(), l.We.cols());
  s.theta = VectorXd::Zero(l.theta.size());
}
void zero_like(LfistaLayer& s, const LfistaLayer& l) {
  s.Wg = MatrixXd::Zero(l.Wg.rows(), l.Wg.cols());
  s.Wm = MatrixXd::Zero(l.Wm.rows(), l.Wm.cols());
  s.We = MatrixXd::Zero(l.We.rows(), l.We.cols());
  s.theta = VectorXd::Zero(l.theta.size());
}
void zero_like(FacnetLayer& s, const FacnetLayer& l) {
  s.A = MatrixXd::Zero(l.A.rows(), l.A.cols());
  s.S = VectorXd::Zero(l.S.size());
}

template <class P>
void ensure_state(P& state, const P& params) {
  if (!state.layers.empty()) return;
  state.layers.resize(params.layers.size());
  for (size_t k = 0; k < params.layers.size(); ++k) {
    auto& s = state.layers[k];
    const auto& l = params.layers[k];
    zero_like(s, l);
  }
}

}  // namespace

void adagrad_step(ListaParams& params, const ListaParams& grads, ListaParams& state, double lr,
                  double eps) {
  ensure_state(state, params);
  for (size_t k = 0; k < params.layers.size(); ++k) {
    adagrad_array(params.layers[k].Wg, grads.layers[k].Wg, state.layers[k].Wg, lr, eps);
    adagrad_array(params.layers[k].We, grads.layers[k].We, state.layers[k].We, lr, eps);
    adagrad_array(params.layers[k].theta, grads.layers[k].theta, state.layers[k].theta, lr, eps);
    params.layers[k].theta = params.layers[k].theta.cwiseMax(0.0);
  }
}

void adagrad_step(LfistaParams& params, const LfistaParams& grads, LfistaParams& state, double lr,
                  double eps) {
  ensure_state(state, params);
  for (size_t k = 0; k < params.layers.size(); ++k) {
    adagrad_array(params.layers[k].Wg, grads.layers[k].Wg, state.layers[k].Wg, lr, eps);
    adagrad_array(params.layers[k].Wm, grads.layers[k].Wm, state.layers[k].Wm, lr, eps);
    adagrad_array(params.layers[k].We, grads.layers[k].We, state.layers[k].We, lr, eps);
    adagrad_array(params.layers[k].theta, grads.layers[k].theta, state.layers[k].theta, lr, eps);
    params.layers[k].theta = params.layers[k].theta.cwiseMax(0.0);
  }
}

void adagrad_step(FacnetParams& params, const FacnetParams& grads, FacnetParams& state, double lr,
                  double eps) {
  ensure_state(state, params);
  for (size_t k = 0; k < params.layers.size(); ++k) {
    adagrad_array(params.layers[k].A, grads.layers[k].A, state.layers[k].A, lr, eps);
    // multiplicative update keeps S > 0 (log-space Adagrad)
    auto& S = params.layers[k].S;
    auto& acc = state.layers[k].S;
    const auto& g = grads.layers[k].S;
    acc.array() += g.array().square();
    S.array() *= (-lr * g.array() / (acc.array().sqrt() + eps)).exp();
  }
}

MatrixXd stiefel_project(const MatrixXd& A) {
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().minCoeff() <= 1e-12)
    throw std::runtime_error("stiefel_project: rank-deficient matrix");
  return svd.matrixU() * svd.matrixV().transpose();
}

void stiefel_project_in_place(FacnetParams& params) {
  for (auto& l : params.layers) l.A = stiefel_project(l.A);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

EvalSet make_eval_set(std::shared_ptr<const DictOps> ops, MatrixXd X, double lambda,
                      double ref_tol) {
  EvalSet ev;
  ev.lambda = lambda;
  ev.DtX = ops->dict.entries.transpose() * X;
  ev.f_star.reserve(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    LassoProblem p = build_problem(ops, X.col(j), lambda);
    ev.f_star.push_back(lasso_cost(p, reference_solution(p, ref_tol)));
  }
  ev.X = std::move(X);
  ev.ops = std::move(ops);
  return ev;
}

namespace {

double gap_from_codes(const EvalSet& ev, const MatrixXd& ZK) {
  MatrixXd R = ev.X - ev.ops->dict.entries * ZK;
  double acc = 0;
  for (Eigen::Index j = 0; j < ev.X.cols(); ++j) {
    double c = 0.5 * R.col(j).squaredNorm() + ev.lambda * ZK.col(j).lpNorm<1>();
    acc += c - ev.f_star[j];
  }
  return acc / double(ev.X.cols());
}

}  // namespace

double mean_test_gap(const ListaParams& params, const EvalSet& ev) {
  return gap_from_codes(ev, lista_forward_cols(params, ev.X, nullptr, nullptr));
}
double mean_test_gap(const LfistaParams& params, const EvalSet& ev) {
  return gap_from_codes(ev,
                        lfista_forward_cols(params, ev.X, nullptr, nullptr));
}
double mean_test_gap(const FacnetParams& params, const EvalSet& ev) {
  return gap_from_codes(
      ev, facnet_forward_cols(params, *ev.ops, ev.lambda, ev.DtX, nullptr, nullptr));
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

std::string net_kind_name(NetKind k) {
  switch (k) {
    case NetKind::lista: return "lista";
    case NetKind::lfista: return "lfista";
    case NetKind::facnet: return "facnet";
  }
  return "?";
}

NetKind net_kind_from_name(const std::string& name) {
  if (name == "lista") return NetKind::lista;
  if (name == "lfista") return NetKind::lfista;
  if (name == "facnet") return NetKind::facnet;
  throw std::invalid_argument("unknown net kind: " + name);
}

namespace {

template <class Params>
Params project_for_eval(const Params& p) {
  return p;
}
template <>
FacnetParams project_for_eval(const FacnetParams& p) {
  FacnetParams q = p;
  stiefel_project_in_place(q);
  return q;
}

template <class Params>
struct StageResult {
  Params params;
  double gap;
};

template <class Params>
StageResult<Params> train_stage(Params params, const BernoulliGaussianModel& generator,
                                const NetContext& ctx, const TrainConfig& config,
                                const EvalSet& eval, std::vector<CurvePoint>& curve,
                                int step_offset) {
  const MatrixXd& D = ctx.ops->dict.entries;
  MatrixXd probe = D * sample_codes(generator, std::max(1, config.batch_size),
                                    derive_seed(config.seed, 0));
  double init_loss = net_loss(params, ctx, probe);
  if (!std::isfinite(init_loss)) throw std::runtime_error("training: non-finite initial loss");

  Params best = params;
  double best_gap = mean_test_gap(project_for_eval(params), eval);
  curve.push_back({step_offset, init_loss, best_gap});

  Params grads, state;
  for (int step = 1; step <= config.steps; ++step) {
    MatrixXd X = D * sample_codes(generator, config.batch_size,
                                  derive_seed(config.seed, static_cast<std::uint64_t>(step)));
    double loss = net_backward(params, ctx, X, grads);
    if (!std::isfinite(loss) || loss > 1e6 * (std::abs(init_loss) + 1.0))
      throw std::runtime_error("training diverged at step " + std::to_string(step));
    adagrad_step(params, grads, state, config.learning_rate, config.adagrad_epsilon);

    if (step % config.eval_every == 0 || step == config.steps) {
      double gap = mean_test_gap(project_for_eval(params), eval);
      curve.push_back({step_offset + step, loss, gap});
      if (gap < best_gap) {
        best_gap = gap;
        best = params;
      }
    }
  }
  if (!config.keep_best && config.steps > 0) {
    best = params;
    best_gap = curve.back().test_cost_gap;
  }
  return {std::move(best), best_gap};
}

template <class Params, class InitFn>
StageResult<Params> train_generic(const BernoulliGaussianModel& generator, const NetContext& ctx,
                                  double lambda, int depth, const TrainConfig& config,
                                  const EvalSet& eval, std::vector<CurvePoint>& curve,
                                  InitFn init) {
  Params full = init(*ctx.ops, lambda, depth);
  if (!config.greedy || depth == 0)
    return train_stage(std::move(full), generator, ctx, config, eval, curve, 0);

  Params current = init(*ctx.ops, lambda, 0);
  int offset = 0;
  StageResult<Params> res;
  for (int d = 1; d <= depth; ++d) {
    current.layers.push_back(full.layers[d - 1]);
    res = train_stage(current, generator, ctx, config, eval, curve, offset);
    current = res.params;
    offset += config.steps + 1;
  }
  return res;
}

}  // namespace

TrainedNet train(NetKind kind, const BernoulliGaussianModel& generator,
                 std::shared_ptr<const DictOps> ops, double lambda, int depth,
                 const TrainConfig& config, const EvalSet* eval) {
  if (depth < 0) throw std::invalid_argument("train: depth must be >= 0");
  if (config.steps < 0 || config.batch_size < 1 || config.learning_rate <= 0 ||
      config.eval_every < 1)
    throw std::invalid_argument("train: bad config");
  if (generator.m != ops->dict.m()) throw std::invalid_argument("train: generator m != dict m");

  NetContext ctx{ops, lambda};
  EvalSet local;
  if (!eval) {
    MatrixXd Xtest =
        ops->dict.entries * sample_codes(generator, config.test_samples,
                                         derive_seed(config.seed, 999999937ull));
    local = make_eval_set(ops, std::move(Xtest), lambda);
    eval = &local;
  }

  TrainedNet out;
  out.kind = kind;
  out.depth = depth;
  switch (kind) {
    case NetKind::lista: {
      auto r = train_generic<ListaParams>(
          generator, ctx, lambda, depth, config, *eval, out.curve,
          [](const DictOps& o, double l, int K) { return lista_init(o, l, K); });
      out.lista = std::move(r.params);
      out.test_gap = r.gap;
      break;
    }
    case NetKind::lfista: {
      auto r = train_generic<LfistaParams>(
          generator, ctx, lambda, depth, config, *eval, out.curve,
          [](const DictOps& o, double l, int K) { return lfista_init(o, l, K); });
      out.lfista = std::move(r.params);
      out.test_gap = r.gap;
      break;
    }
    case NetKind::facnet: {
      auto r = train_generic<FacnetParams>(
          generator, ctx, lambda, depth, config, *eval, out.curve,
          [&](const DictOps& o, double l, int K) { return facnet_init(o, l, K, config.mu); });
      stiefel_project_in_place(r.params);
      out.facnet = std::move(r.params);
      out.test_gap = r.gap;
      break;
    }
  }
  return out;
}

double mean_test_gap(const TrainedNet& net, const EvalSet& eval) {
  switch (net.kind) {
    case NetKind::lista: return mean_test_gap(net.lista, eval);
    case NetKind::lfista: return mean_test_gap(net.lfista, eval);
    case NetKind::facnet: return mean_test_gap(net.facnet, eval);
  }
  throw std::logic_error("bad net kind");
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {
int code_dim_of(const TrainedNet& net) {
  switch (net.kind) {
    case NetKind::lista: return net.lista.code_dim;
    case NetKind::lfista: return net.lfista.code_dim;
    case NetKind::facnet: return net.facnet.code_dim;
  }
  return 0;
}
}  // namespace

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "step,train_loss,test_cost_gap\n";
  for (const auto& c : curve)
    out << c.step << ',' << format_double(c.train_loss) << ',' << format_double(c.test_cost_gap)
        << '\n';
  return out.str();
}

std::vector<double> per_sample_gaps(const TrainedNet& net, const EvalSet& eval) {
  std::vector<double> gaps;
  gaps.reserve(eval.X.cols());
  const MatrixXd& D = eval.ops->dict.entries;
  for (Eigen::Index j = 0; j < eval.X.cols(); ++j) {
    VectorXd z;
    switch (net.kind) {
      case NetKind::lista: z = lista_forward(net.lista, eval.X.col(j)); break;
      case NetKind::lfista: z = lfista_forward(net.lfista, eval.X.col(j)); break;
      case NetKind::facnet:
        z = facnet_forward(net.facnet, eval.ops->B, eval.DtX.col(j), eval.lambda);
        break;
    }
    double cost = 0.5 * (eval.X.col(j) - D * z).squaredNorm() + eval.lambda * z.lpNorm<1>();
    gaps.push_back(cost - eval.f_star[j]);
  }
  return gaps;
}

namespace {
DepthCurvePoint curve_point(int depth, const std::vector<double>& gaps) {
  DepthCurvePoint pt;
  pt.depth = depth;
  pt.n_samples = static_cast<int>(gaps.size());
  for (double g : gaps) pt.mean_gap += g;
  pt.mean_gap /= std::max<size_t>(gaps.size(), 1);
  double var = 0;
  for (double g : gaps) var += (g - pt.mean_gap) * (g - pt.mean_gap);
  if (gaps.size() > 1) pt.std_error = std::sqrt(var / double(gaps.size() - 1) / double(gaps.size()));
  return pt;
}
}  // namespace

std::vector<DepthCurvePoint> evaluate_depth_curve(const std::vector<TrainedNet>& models_by_depth,
                                                  const EvalSet& eval) {
  std::vector<DepthCurvePoint> out;
  for (const auto& net : models_by_depth)
    out.push_back(curve_point(net.depth, per_sample_gaps(net, eval)));
  return out;
}

std::vector<DepthCurvePoint> solver_depth_curve(bool use_fista, const EvalSet& eval,
                                                const std::vector<int>& depths) {
  if (depths.empty()) return {};
  const int maxd = *std::max_element(depths.begin(), depths.end());
  std::vector<std::vector<double>> gaps(maxd + 1);
  for (Eigen::Index j = 0; j < eval.X.cols(); ++j) {
    LassoProblem p = build_problem(eval.ops, eval.X.col(j), eval.lambda);
    VectorXd z0 = VectorXd::Zero(p.m());
    SolverTrace t = use_fista ? fista(p, z0, maxd, false) : ista(p, z0, maxd, false);
    for (int k = 0; k <= maxd; ++k) gaps[k].push_back(t.costs[k] - eval.f_star[j]);
  }
  std::vector<DepthCurvePoint> out;
  for (int d : depths) out.push_back(curve_point(d, gaps[d]));
  return out;
}

void save_net(const std::filesystem::path& dir, const TrainedNet& net) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json meta;
  meta["kind"] = net_kind_name(net.kind);
  meta["depth"] = net.depth;
  meta["m"] = code_dim_of(net);
  meta["test_gap"] = net.test_gap;
  auto mat = [&](const std::string& name, const MatrixXd& M) { save_matrix(dir / name, M); };
  switch (net.kind) {
    case NetKind::lista:
      for (int k = 0; k < net.lista.depth(); ++k) {
        mat("Wg_" + std::to_string(k) + ".mat", net.lista.layers[k].Wg);
        mat("We_" + std::to_string(k) + ".mat", net.lista.layers[k].We);
        mat("theta_" + std::to_string(k) + ".mat", net.lista.layers[k].theta);
      }
      break;
    case NetKind::lfista:
      for (int k = 0; k < net.lfista.depth(); ++k) {
        mat("Wg_" + std::to_string(k) + ".mat", net.lfista.layers[k].Wg);
        mat("Wm_" + std::to_string(k) + ".mat", net.lfista.layers[k].Wm);
        mat("We_" + std::to_string(k) + ".mat", net.lfista.layers[k].We);
        mat("theta_" + std::to_string(k) + ".mat", net.lfista.layers[k].theta);
      }
      break;
    case NetKind::facnet:
      meta["mu"] = net.facnet.mu;
      for (int k = 0; k < net.facnet.depth(); ++k) {
        mat("A_" + std::to_string(k) + ".mat", net.facnet.layers[k].A);
        mat("S_" + std::to_string(k) + ".mat", net.facnet.layers[k].S);
      }
      break;
  }
  std::ofstream(dir / "model.json") << meta.dump(2) << '\n';
  std::ofstream(dir / "curve.csv") << curve_to_csv(net.curve);
}

TrainedNet load_net(const std::filesystem::path& dir) {
  std::ifstream in(dir / "model.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "model.json").string());
  nlohmann::json meta = nlohmann::json::parse(in);
  TrainedNet net;
  net.kind = net_kind_from_name(meta.at("kind").get<std::string>());
  net.depth = meta.at("depth").get<int>();
  net.test_gap = meta.value("test_gap", 0.0);
  int m = meta.value("m", 0);
  net.lista.code_dim = net.lfista.code_dim = net.facnet.code_dim = m;
  auto mat = [&](const std::string& name) { return load_matrix(dir / name); };
  for (int k = 0; k < net.depth; ++k) {
    std::string i = std::to_string(k);
    switch (net.kind) {
      case NetKind::lista:
        net.lista.layers.push_back({mat("Wg_" + i + ".mat"), mat("We_" + i + ".mat"),
                                    VectorXd(mat("theta_" + i + ".mat"))});
        break;
      case NetKind::lfista:
        net.lfista.layers.push_back({mat("Wg_" + i + ".mat"), mat("Wm_" + i + ".mat"),
                                     mat("We_" + i + ".mat"),
                                     VectorXd(mat("theta_" + i + ".mat"))});
        break;
      case NetKind::facnet:
        net.facnet.mu = meta.value("mu", 1.0);
        net.facnet.layers.push_back({mat("A_" + i + ".mat"), VectorXd(mat("S_" + i + ".mat"))});
        break;
    }
  }
  return net;
}

}  // namespace sclab
