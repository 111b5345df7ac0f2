#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "edgeflow/data.hpp"
#include "edgeflow/engine.hpp"
#include "edgeflow/types.hpp"

namespace edgeflow {

// Everything the convergence-bound evaluator consumes. The estimators below
// produce empirical maxima over finite probes, so each constant is a lower
// bound of the true supremum and is reported as such.
struct BoundConstants {
  Real L = 0;
  Real G_sq = 0;
  Real sigma_sq = 0;
  std::vector<Real> lambda_sq;  // per cluster
  Real F0 = 0;
  Real F_star = 0;
  Real eta = 0;
  int K = 1;
  int T = 1;
  int N_m = 1;

  Real lk_eta() const { return L * static_cast<Real>(K) * eta; }
  bool lk_eta_ok() const { return lk_eta() < 1.0; }
  void validate() const;
};

struct BoundBreakdown {
  Real term_init = 0;      // 4 (F0 - F*) / (K eta T)
  Real term_hetero = 0;    // (2/T) sum_t lambda^2_{m(t)}
  Real term_variance = 0;  // (2/T) sum_t L eta sigma^2 / N_m
  Real term_drift = 0;     // 4 L^2 K^2 eta^2 G^2 / 3
  Real total = 0;
};

// Bound on the time-averaged squared gradient norm, with per-round
// heterogeneity taken from the schedule. Warns (does not throw) when
// L K eta >= 1; callers should check lk_eta_ok().
BoundBreakdown theorem1_bound(const BoundConstants& c, const std::vector<int>& schedule);

// Degenerate IID form: independently computed from the same constants with
// the heterogeneity term dropped.
BoundBreakdown iid_simplified_bound(const BoundConstants& c);

using GradientFn = std::function<Vector(const Vector&)>;

// Max ratio ||grad(theta) - grad(theta')|| / ||theta - theta'|| over random
// probe pairs with ||delta|| <= radius. Degenerate pairs are skipped.
Real estimate_smoothness_fn(const GradientFn& grad, Index dim, int num_probes, Real radius,
                            std::uint64_t seed);

Real estimate_smoothness(const ModelSpec& spec, const Dataset& dataset, int num_probes,
                         Real radius, std::uint64_t seed);

// Same ratio over explicit parameter pairs (e.g. consecutive run iterates).
Real smoothness_over_pairs(const GradientFn& grad,
                           const std::vector<std::pair<Vector, Vector>>& pairs);

struct GradientBounds {
  Real G_sq_hat = 0;
  Real sigma_sq_hat = 0;
};

// Empirical max of squared stochastic-gradient norms and of the per-point
// batch variance, probed at the given parameter points.
GradientBounds estimate_gradient_bounds(const ModelSpec& spec,
                                        const std::vector<ClientShard>& shards,
                                        const std::vector<ParamVector>& points,
                                        int batches_per_point, Index batch_size,
                                        std::uint64_t seed);

// Points drawn from the init distribution when no checkpoints are supplied.
GradientBounds estimate_gradient_bounds(const ModelSpec& spec,
                                        const std::vector<ClientShard>& shards,
                                        int sample_points, int batches_per_point,
                                        Index batch_size, std::uint64_t seed);

// Per-cluster ||grad F(theta) - grad F_m(theta)||^2 with full-shard
// gradients; F is the equally weighted client average.
std::vector<Real> estimate_heterogeneity(const ModelSpec& spec, const ParamVector& params,
                                         const std::vector<ClientShard>& shards,
                                         const ClusterPlan& plan);

// Max over several checkpoints, per cluster.
std::vector<Real> estimate_heterogeneity_max(const ModelSpec& spec,
                                             const std::vector<ParamVector>& checkpoints,
                                             const std::vector<ClientShard>& shards,
                                             const ClusterPlan& plan);

struct Lemma3Violation {
  int t = 0;
  int k = 0;
  Real ratio = 0;
};

struct Lemma3Report {
  std::vector<Lemma3Violation> violations;
  Real max_ratio = 0;
};

// Checks the cluster-mean drift bound: mean_n ||theta^t - theta^t_{n,k}||^2
// <= k^2 eta^2 G^2 for every recorded round and local step.
Lemma3Report check_lemma3(const std::vector<RoundRecord>& records, Real eta, Real G_sq_hat);

struct BoundComparison {
  Real empirical_avg_grad_norm_sq = 0;
  Real bound_total = 0;
  Real slack = 0;
  bool constants_valid = false;  // L K eta < 1 held
};

// Empirical time-average of the pooled full-batch squared gradient norm at
// each round start, against the evaluated bound.
BoundComparison bound_vs_empirical(const ModelSpec& spec, const RunResult& run,
                                   const std::vector<ClientShard>& shards,
                                   const BoundConstants& c, const std::vector<int>& schedule);

struct CentralizedFit {
  ParamVector params;
  Real loss = 0;
};

// Full-batch gradient descent with halving step control; used for the
// optimum proxy F* and for learnability checks.
CentralizedFit centralized_train(const ModelSpec& spec, const Batch& data, int iterations,
                                 std::uint64_t seed);

// Heterogeneity of one explicit participant set against the global average.
Real estimate_set_heterogeneity(const ModelSpec& spec, const ParamVector& params,
                                const std::vector<ClientShard>& shards,
                                const std::vector<int>& participants);

struct RunBoundInputs {
  BoundConstants constants;
  std::vector<int> schedule;  // indexes constants.lambda_sq per round
};

// Assembles run-local constants for a finished run: smoothness from probes
// plus consecutive-iterate ratios, G^2 from the run's observed max, sigma^2
// and lambda^2 probed at round-start checkpoints, F* from a centralized fit.
// With a cluster plan, lambda^2 is the per-cluster max over round starts and
// the schedule is the run's. Without one (FedAvg), each round's sampled set
// acts as a temporary cluster: lambda_sq gets one entry per round.
RunBoundInputs estimate_run_constants(const ModelSpec& spec, const RunResult& run,
                                      const std::vector<ClientShard>& shards,
                                      const ClusterPlan* plan, const HyperParams& hp,
                                      int f_star_iterations, int smoothness_probes);

}  // namespace edgeflow
