#include "edgeflow/engine.hpp"

#include <algorithm>
#include <future>
#include <numeric>
#include <string>

namespace edgeflow {

void HyperParams::validate() const {
  if (!(eta > 0)) throw ConfigError("eta must be > 0");
  if (K < 1) throw ConfigError("K must be at least 1");
  if (T < 0) throw ConfigError("T must be nonnegative");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
}

ClusterPlan ClusterPlan::interleaved(int num_clients, int num_clusters,
                                     SchedulePolicy policy, int first_cluster) {
  if (num_clusters < 1) throw ConfigError("cluster count must be positive");
  if (num_clients < num_clusters) {
    throw ConfigError("fewer clients than clusters");
  }
  ClusterPlan plan;
  plan.M = num_clusters;
  plan.policy = policy;
  plan.first_cluster = first_cluster % num_clusters;
  plan.membership.resize(static_cast<std::size_t>(num_clients));
  for (int i = 0; i < num_clients; ++i) {
    plan.membership[static_cast<std::size_t>(i)] = i % num_clusters;
  }
  return plan;
}

ClusterPlan ClusterPlan::seeded_random(int num_clients, int num_clusters, std::uint64_t seed,
                                       SchedulePolicy policy, int first_cluster) {
  ClusterPlan plan = interleaved(num_clients, num_clusters, policy, first_cluster);
  std::vector<int> order(static_cast<std::size_t>(num_clients));
  std::iota(order.begin(), order.end(), 0);
  SplitRng rng = SplitRng(seed).split(stream::kPartition, 4);
  rng.shuffle(order);
  for (int pos = 0; pos < num_clients; ++pos) {
    plan.membership[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] =
        pos % num_clusters;
  }
  return plan;
}

std::vector<std::vector<int>> ClusterPlan::members_by_cluster() const {
  std::vector<std::vector<int>> members(static_cast<std::size_t>(M));
  for (std::size_t i = 0; i < membership.size(); ++i) {
    members[static_cast<std::size_t>(membership[i])].push_back(static_cast<int>(i));
  }
  return members;
}

void ClusterPlan::validate(int num_clients) const {
  if (M < 1) throw ConfigError("cluster count must be positive");
  if (static_cast<int>(membership.size()) != num_clients) {
    throw ConfigError("membership covers " + std::to_string(membership.size()) +
                      " clients, expected " + std::to_string(num_clients));
  }
  std::vector<int> per_cluster(static_cast<std::size_t>(M), 0);
  for (int m : membership) {
    if (m < 0 || m >= M) throw ConfigError("cluster id out of range in membership");
    ++per_cluster[static_cast<std::size_t>(m)];
  }
  for (int m = 0; m < M; ++m) {
    if (per_cluster[static_cast<std::size_t>(m)] == 0) {
      throw ProtocolError("cluster " + std::to_string(m) + " has no members");
    }
  }
}

namespace {

Batch gather_batch(const ClientShard& shard, const std::vector<Index>& rows) {
  Batch batch;
  batch.features.resize(static_cast<Index>(rows.size()), shard.features.cols());
  batch.labels.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    batch.features.row(static_cast<Index>(i)) = shard.features.row(rows[i]);
    batch.labels[static_cast<Index>(i)] = shard.labels[rows[i]];
  }
  return batch;
}

void apply_step(const ModelSpec& spec, const HyperParams& hp, const Batch& batch,
                const ParamVector& start, ParamVector& theta, LocalTrainResult& out) {
  out.drift.push_back((theta - start).squaredNorm());
  const ParamVector g = gradient(spec, theta, batch);
  out.grad_sum += g;
  out.max_grad_norm_sq = std::max(out.max_grad_norm_sq, g.squaredNorm());
  theta -= hp.eta * g;
}

}  // namespace

LocalTrainResult local_train(const ModelSpec& spec, const ParamVector& start,
                             const ClientShard& shard, const HyperParams& hp,
                             int round, int client) {
  hp.validate();
  if (shard.size() < hp.batch_size) {
    throw SamplingError("client " + std::to_string(client) + " shard of " +
                        std::to_string(shard.size()) + " samples cannot supply batches of " +
                        std::to_string(hp.batch_size));
  }
  SplitRng rng = SplitRng(hp.seed).split(stream::kClient, static_cast<std::uint64_t>(round),
                                         static_cast<std::uint64_t>(client));
  LocalTrainResult out;
  out.grad_sum = ParamVector::Zero(start.size());
  ParamVector theta = start;

  if (hp.epoch_mode) {
    // K passes over the shard, shuffled per epoch, consumed in batch-size
    // chunks (tail chunk included).
    std::vector<Index> perm(static_cast<std::size_t>(shard.size()));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (int e = 0; e < hp.K; ++e) {
      rng.shuffle(perm);
      for (Index lo = 0; lo < shard.size(); lo += hp.batch_size) {
        const Index hi = std::min(lo + hp.batch_size, shard.size());
        std::vector<Index> rows(perm.begin() + lo, perm.begin() + hi);
        std::sort(rows.begin(), rows.end());
        apply_step(spec, hp, gather_batch(shard, rows), start, theta, out);
      }
    }
  } else {
    // K steps, one fresh mini-batch per step: without replacement within a
    // batch, with replacement across steps.
    for (int k = 0; k < hp.K; ++k) {
      const std::vector<Index> rows =
          rng.sample_without_replacement(shard.size(), hp.batch_size);
      apply_step(spec, hp, gather_batch(shard, rows), start, theta, out);
    }
  }
  out.final_params = std::move(theta);
  return out;
}

ParamVector aggregate_cluster(const ParamVector& global,
                              const std::vector<ParamVector>& grad_sums, Real eta) {
  if (grad_sums.empty()) {
    throw ProtocolError("aggregation over an empty cluster");
  }
  ParamVector total = ParamVector::Zero(global.size());
  for (const ParamVector& g : grad_sums) {
    if (g.size() != global.size()) {
      throw ConfigError("gradient sum length mismatch in aggregation");
    }
    total += g;
  }
  return global - (eta / static_cast<Real>(grad_sums.size())) * total;
}

int next_cluster(ClusterPlan& plan, int t, SplitRng& schedule_rng) {
  int m;
  if (plan.policy == SchedulePolicy::kFixedSequence) {
    m = (plan.first_cluster + t) % plan.M;
  } else {
    m = static_cast<int>(schedule_rng.below(static_cast<std::uint64_t>(plan.M)));
  }
  if (static_cast<int>(plan.sequence.size()) <= t) {
    plan.sequence.resize(static_cast<std::size_t>(t) + 1, -1);
  }
  plan.sequence[static_cast<std::size_t>(t)] = m;
  return m;
}

EvalResult evaluate(const ModelSpec& spec, const ParamVector& params, const Batch& eval_set) {
  if (eval_set.size() < 1) throw ConfigError("empty eval set");
  EvalResult result;
  result.loss = forward_loss(spec, params, eval_set);
  const Matrix scores = logits(spec, params, eval_set.features);
  Index correct = 0;
  for (Index r = 0; r < scores.rows(); ++r) {
    Index best = 0;
    for (Index c = 1; c < scores.cols(); ++c) {
      if (scores(r, c) > scores(r, best)) best = c;  // ties keep the first index
    }
    if (best == eval_set.labels[r]) ++correct;
  }
  result.accuracy = static_cast<Real>(correct) / static_cast<Real>(eval_set.size());
  return result;
}

Batch pool_shards(const std::vector<ClientShard>& shards) {
  if (shards.empty()) throw ConfigError("no shards to pool");
  Index total = 0;
  for (const ClientShard& s : shards) total += s.size();
  Batch pooled;
  pooled.features.resize(total, shards.front().features.cols());
  pooled.labels.resize(total);
  Index row = 0;
  for (const ClientShard& s : shards) {
    pooled.features.middleRows(row, s.size()) = s.features;
    pooled.labels.segment(row, s.size()) = s.labels;
    row += s.size();
  }
  return pooled;
}

namespace {

// One communication round over a fixed set of active clients. Per-client
// results land in slots indexed by position, so the reduction order (and
// therefore the output) is identical under any execution schedule.
struct RoundOutcome {
  ParamVector next_params;
  Real max_grad_norm_sq = 0;
  std::vector<Real> mean_drift;
};

RoundOutcome run_round(const ModelSpec& spec, const std::vector<ClientShard>& shards,
                       const std::vector<int>& active, const ParamVector& theta,
                       const HyperParams& hp, int t) {
  std::vector<LocalTrainResult> results(active.size());
  auto train_one = [&](std::size_t slot) {
    const int n = active[slot];
    results[slot] = local_train(spec, theta, shards[static_cast<std::size_t>(n)], hp, t, n);
  };

  try {
    if (hp.parallel_clients && active.size() > 1) {
      std::vector<std::future<void>> jobs;
      jobs.reserve(active.size());
      for (std::size_t i = 0; i < active.size(); ++i) {
        jobs.push_back(std::async(std::launch::async, train_one, i));
      }
      for (auto& j : jobs) j.get();
    } else {
      for (std::size_t i = 0; i < active.size(); ++i) train_one(i);
    }
  } catch (const NumericError& e) {
    throw NumericError("round " + std::to_string(t) + ": " + e.what(), e.layer);
  }

  std::vector<ParamVector> grad_sums;
  grad_sums.reserve(results.size());
  for (const LocalTrainResult& r : results) grad_sums.push_back(r.grad_sum);
  RoundOutcome outcome;
  outcome.next_params = aggregate_cluster(theta, grad_sums, hp.eta);

  // Eq-equivalent form: averaging the client models must land on the same
  // point since everyone starts from theta.
  ParamVector mean_final = ParamVector::Zero(theta.size());
  for (const LocalTrainResult& r : results) mean_final += r.final_params;
  mean_final /= static_cast<Real>(results.size());
  if ((mean_final - outcome.next_params).cwiseAbs().maxCoeff() > 1e-9) {
    throw ProtocolError("aggregation forms diverged at round " + std::to_string(t));
  }

  const std::size_t steps = results.front().drift.size();
  outcome.mean_drift.assign(steps, 0.0);
  for (const LocalTrainResult& r : results) {
    if (r.drift.size() != steps) {
      throw ProtocolError("clients took differing step counts in round " + std::to_string(t));
    }
    for (std::size_t k = 0; k < steps; ++k) outcome.mean_drift[k] += r.drift[k];
    outcome.max_grad_norm_sq = std::max(outcome.max_grad_norm_sq, r.max_grad_norm_sq);
  }
  for (Real& d : outcome.mean_drift) d /= static_cast<Real>(results.size());
  return outcome;
}

RunResult run_protocol(const ModelSpec& spec, const std::vector<ClientShard>& shards,
                       ClusterPlan* plan, int clients_per_round, const HyperParams& hp,
                       const Batch& eval_set) {
  spec.validate();
  hp.validate();
  const int num_clients = static_cast<int>(shards.size());
  const Index p = spec.param_count();

  SplitRng root(hp.seed);
  SplitRng schedule_rng = root.split(stream::kSchedule);
  SplitRng sampler_rng = root.split(stream::kSampler);

  RunResult run;
  run.trajectory.reserve(static_cast<std::size_t>(hp.T) + 1);
  run.trajectory.push_back(init_params(spec, root.split(stream::kInit)));

  const Batch pooled = pool_shards(shards);
  std::int64_t wall_uploaded = 0;

  for (int t = 0; t < hp.T; ++t) {
    std::vector<int> active;
    int cluster_id = -1;
    if (plan != nullptr) {
      cluster_id = next_cluster(*plan, t, schedule_rng);
      const auto members = plan->members_by_cluster();
      active = members[static_cast<std::size_t>(cluster_id)];
    } else if (clients_per_round >= num_clients) {
      active.resize(static_cast<std::size_t>(num_clients));
      std::iota(active.begin(), active.end(), 0);
    } else {
      SplitRng round_sampler = sampler_rng.split(static_cast<std::uint64_t>(t));
      for (Index id : round_sampler.sample_without_replacement(num_clients, clients_per_round)) {
        active.push_back(static_cast<int>(id));
      }
    }

    const ParamVector& theta = run.trajectory.back();
    RoundOutcome outcome = run_round(spec, shards, active, theta, hp, t);
    if (!outcome.next_params.allFinite()) {
      throw NumericError("non-finite global model after round " + std::to_string(t), -1);
    }

    wall_uploaded += static_cast<std::int64_t>(active.size()) * static_cast<std::int64_t>(p);

    RoundRecord record;
    record.t = t;
    record.cluster_id = cluster_id;
    record.global_loss = forward_loss(spec, outcome.next_params, pooled);
    record.eval_accuracy = evaluate(spec, outcome.next_params, eval_set).accuracy;
    record.per_client_grad_norm_sq_max = outcome.max_grad_norm_sq;
    record.drift_trajectory = std::move(outcome.mean_drift);
    record.wall_params_uploaded = wall_uploaded;
    run.records.push_back(std::move(record));

    run.active_sets.push_back(std::move(active));
    run.trajectory.push_back(std::move(outcome.next_params));
  }

  run.final_params = run.trajectory.back();
  if (plan != nullptr) run.schedule = plan->sequence;
  return run;
}

}  // namespace

RunResult run_edgeflow(const ModelSpec& spec, const std::vector<ClientShard>& shards,
                       ClusterPlan plan, const HyperParams& hp, const Batch& eval_set) {
  plan.validate(static_cast<int>(shards.size()));
  return run_protocol(spec, shards, &plan, 0, hp, eval_set);
}

RunResult run_fedavg(const ModelSpec& spec, const std::vector<ClientShard>& shards,
                     int clients_per_round, const HyperParams& hp, const Batch& eval_set) {
  if (clients_per_round < 1 || clients_per_round > static_cast<int>(shards.size())) {
    throw ConfigError("clients_per_round must lie in [1, N]");
  }
  return run_protocol(spec, shards, nullptr, clients_per_round, hp, eval_set);
}

}  // namespace edgeflow
