#pragma once

#include <cstdint>
#include <vector>

#include "edgeflow/data.hpp"
#include "edgeflow/model.hpp"
#include "edgeflow/rng.hpp"
#include "edgeflow/types.hpp"

namespace edgeflow {

enum class SchedulePolicy { kFixedSequence, kRandom };

struct HyperParams {
  Real eta = 0.01;
  int K = 5;          // local steps per round (or epochs with epoch_mode)
  int T = 200;        // global rounds
  Index batch_size = 64;
  std::uint64_t seed = 42;
  bool parallel_clients = false;
  bool epoch_mode = false;  // run K passes over the shard instead of K steps

  void validate() const;
};

// Fixed client-to-cluster assignment plus the round schedule. The sequence
// is materialized as rounds execute.
struct ClusterPlan {
  int M = 1;
  std::vector<int> membership;  // client id -> cluster id
  SchedulePolicy policy = SchedulePolicy::kFixedSequence;
  int first_cluster = 0;
  std::vector<int> sequence;

  // Clients dealt round-robin: client i joins cluster i mod M. Keeps cluster
  // sizes equal when M divides N and, combined with round-robin major-class
  // assignment, gives clusters a coherent label skew under non-IID data.
  static ClusterPlan interleaved(int num_clients, int num_clusters,
                                 SchedulePolicy policy = SchedulePolicy::kFixedSequence,
                                 int first_cluster = 0);

  // Balanced assignment of a seeded client shuffle: cluster composition is
  // arbitrary with respect to labels, the way geographic clustering would
  // be. Sizes stay equal when M divides N.
  static ClusterPlan seeded_random(int num_clients, int num_clusters, std::uint64_t seed,
                                   SchedulePolicy policy = SchedulePolicy::kFixedSequence,
                                   int first_cluster = 0);

  std::vector<std::vector<int>> members_by_cluster() const;
  void validate(int num_clients) const;
};

struct RoundRecord {
  int t = 0;
  int cluster_id = -1;  // -1 when the round used sampled clients (FedAvg)
  Real global_loss = 0;
  Real eval_accuracy = 0;
  Real per_client_grad_norm_sq_max = 0;
  std::vector<Real> drift_trajectory;  // mean squared drift per local step, [0] = 0
  std::int64_t wall_params_uploaded = 0;
};

struct LocalTrainResult {
  ParamVector final_params;
  ParamVector grad_sum;
  std::vector<Real> drift;  // ||theta^t - theta_{n,k}||^2 before step k
  Real max_grad_norm_sq = 0;
};

// K local SGD steps from the round-start model, one fresh seeded mini-batch
// per step.
LocalTrainResult local_train(const ModelSpec& spec, const ParamVector& start,
                             const ClientShard& shard, const HyperParams& hp,
                             int round, int client);

// theta^{t+1} = theta^t - (eta / N_m) * sum of client gradient sums.
ParamVector aggregate_cluster(const ParamVector& global,
                              const std::vector<ParamVector>& grad_sums, Real eta);

// Picks the round-t cluster under the plan's policy and records it into
// plan.sequence.
int next_cluster(ClusterPlan& plan, int t, SplitRng& schedule_rng);

struct EvalResult {
  Real loss = 0;
  Real accuracy = 0;
};

// Mean loss and top-1 accuracy; argmax ties break to the first index.
EvalResult evaluate(const ModelSpec& spec, const ParamVector& params, const Batch& eval_set);

struct RunResult {
  std::vector<RoundRecord> records;
  ParamVector final_params;
  // theta^0 .. theta^T; entry t is the round-t starting model.
  std::vector<ParamVector> trajectory;
  std::vector<int> schedule;                  // materialized m(t) (empty for FedAvg)
  std::vector<std::vector<int>> active_sets;  // sorted participant ids per round
};

RunResult run_edgeflow(const ModelSpec& spec, const std::vector<ClientShard>& shards,
                       ClusterPlan plan, const HyperParams& hp, const Batch& eval_set);

// FedAvg baseline: samples clients_per_round uniformly without replacement
// each round; aggregation is identical in form.
RunResult run_fedavg(const ModelSpec& spec, const std::vector<ClientShard>& shards,
                     int clients_per_round, const HyperParams& hp, const Batch& eval_set);

// Pools every shard into one batch (clients hold equally sized shards, so
// the pooled mean loss is the global objective).
Batch pool_shards(const std::vector<ClientShard>& shards);

}  // namespace edgeflow
