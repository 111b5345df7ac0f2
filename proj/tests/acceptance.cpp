// Acceptance suite: one criterion per function, one pass/fail line each.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "edgeflow/bounds.hpp"
#include "edgeflow/harness.hpp"
#include "oracles.hpp"

using namespace edgeflow;
namespace fs = std::filesystem;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw CheckFailure(message);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

// Reference experiment geometry: 100 clients, 10 clusters of 10, 10-class
// Gaussian task with 1000 samples per class, batch 64.
ModelSpec reference_model() {
  ModelSpec spec;
  spec.kind = ModelKind::kLinearSoftmax;
  spec.input_dim = 16;
  spec.num_classes = 10;
  return spec;
}

DatasetSpec reference_data() {
  DatasetSpec spec;
  spec.num_classes = 10;
  spec.input_dim = 16;
  spec.samples_per_class = 1000;
  spec.class_separation = 4.0;
  spec.noise_std = 1.0;
  return spec;
}

Batch make_eval_batch(std::uint64_t seed) {
  DatasetSpec spec = reference_data();
  spec.samples_per_class = 200;
  return make_synthetic_dataset(spec, SplitRng(seed).split(stream::kEval).next_u64())
      .as_batch();
}

Batch random_batch(const ModelSpec& spec, Index rows, SplitRng& rng) {
  Batch batch;
  batch.features.resize(rows, spec.input_dim);
  batch.labels.resize(rows);
  for (Index r = 0; r < rows; ++r) {
    for (Index j = 0; j < spec.input_dim; ++j) batch.features(r, j) = rng.normal();
    batch.labels[r] =
        static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.num_classes)));
  }
  return batch;
}

BoundConstants derived_constants() {
  BoundConstants c;
  c.L = 1.0;
  c.G_sq = 1.0;
  c.sigma_sq = 1.0;
  c.lambda_sq = {0.2};
  c.F0 = 1.0;
  c.F_star = 0.0;
  c.eta = 0.01;
  c.K = 5;
  c.T = 100;
  c.N_m = 10;
  return c;
}

struct TheoryRun {
  RunResult run;
  std::vector<ClientShard> shards;
  ClusterPlan plan;
  HyperParams hp;
};

// NIID-B (or IID) run at the theory setting: T=50, K=5, N_m=10, eta chosen
// so the estimated L keeps L*K*eta below one.
TheoryRun theory_run(PartitionName name, std::uint64_t seed) {
  TheoryRun out;
  const Dataset dataset = make_synthetic_dataset(reference_data(), seed);
  out.shards = build_partition(PartitionConfig::preset(name, 100), dataset, seed);
  out.plan = ClusterPlan::interleaved(100, 10);
  out.hp.eta = 0.01;
  out.hp.K = 5;
  out.hp.T = 50;
  out.hp.batch_size = 64;
  out.hp.seed = seed;
  out.run = run_edgeflow(reference_model(), out.shards, out.plan, out.hp,
                         make_eval_batch(seed));
  return out;
}

// --- criterion 1 -----------------------------------------------------------

void criterion_gradient_correctness() {
  ModelSpec mlp;
  mlp.kind = ModelKind::kMlp;
  mlp.input_dim = 16;
  mlp.hidden_dims = {12};
  mlp.num_classes = 10;

  SplitRng root(2024);
  for (const ModelSpec& spec : {reference_model(), mlp}) {
    for (int probe = 0; probe < 100; ++probe) {
      SplitRng rng = root.split(static_cast<std::uint64_t>(probe),
                                static_cast<std::uint64_t>(spec.hidden_dims.size()));
      ParamVector params(spec.param_count());
      for (Index i = 0; i < params.size(); ++i) params[i] = 0.5 * rng.normal();
      const Batch batch = random_batch(spec, 5, rng);

      const ParamVector g = gradient(spec, params, batch);
      const ParamVector fd = oracles::finite_difference_gradient(spec, params, batch);
      for (Index i = 0; i < g.size(); ++i) {
        const double tol = std::max(1e-4, 1e-3 * std::abs(g[i]));
        require(std::abs(g[i] - fd[i]) <= tol,
                "finite-difference mismatch at probe " + std::to_string(probe) +
                    " coordinate " + std::to_string(i) + ": grad " + fmt(g[i]) +
                    " vs fd " + fmt(fd[i]));
      }
    }
  }
}

// --- criterion 2 -----------------------------------------------------------

void criterion_protocol_identities() {
  const ModelSpec spec = reference_model();
  const Dataset dataset = make_synthetic_dataset(reference_data(), 7);
  const auto shards = partition_iid(dataset, 20, 7);
  HyperParams hp;
  hp.eta = 0.05;
  hp.K = 5;
  hp.T = 20;
  hp.batch_size = 64;
  hp.seed = 7;

  // (a) Eq. 3 as a gradient sum equals plain model averaging.
  const ParamVector global = init_params(spec, SplitRng(7).split(stream::kInit));
  for (const int cluster_size : {1, 2, 5, 10, 20}) {
    std::vector<ParamVector> grad_sums;
    ParamVector mean_final = ParamVector::Zero(global.size());
    for (int n = 0; n < cluster_size; ++n) {
      const LocalTrainResult r =
          local_train(spec, global, shards[static_cast<std::size_t>(n)], hp, 0, n);
      grad_sums.push_back(r.grad_sum);
      mean_final += r.final_params;
    }
    mean_final /= static_cast<Real>(cluster_size);
    const ParamVector aggregated = aggregate_cluster(global, grad_sums, hp.eta);
    const Real gap = (aggregated - mean_final).cwiseAbs().maxCoeff();
    require(gap <= 1e-12, "aggregation identity off by " + fmt(gap) + " at N_m=" +
                              std::to_string(cluster_size));
  }

  // (b) One all-client cluster is bitwise FedAvg at full participation.
  const Batch eval_set = make_eval_batch(7);
  const RunResult ef =
      run_edgeflow(spec, shards, ClusterPlan::interleaved(20, 1), hp, eval_set);
  const RunResult fa = run_fedavg(spec, shards, 20, hp, eval_set);
  require(ef.trajectory.size() == fa.trajectory.size(), "trajectory lengths differ");
  for (std::size_t t = 0; t < ef.trajectory.size(); ++t) {
    require(ef.trajectory[t] == fa.trajectory[t],
            "trajectories diverge at round " + std::to_string(t));
  }
}

// --- criterion 3 -----------------------------------------------------------

void criterion_lemma3() {
  const TheoryRun niid = theory_run(PartitionName::kNiidB, 11);
  Real g_sq = 0;
  for (const RoundRecord& rec : niid.run.records) {
    g_sq = std::max(g_sq, rec.per_client_grad_norm_sq_max);
  }
  const Lemma3Report report = check_lemma3(niid.run.records, niid.hp.eta, g_sq);
  require(report.violations.empty(),
          std::to_string(report.violations.size()) + " drift-bound violations, max ratio " +
              fmt(report.max_ratio));
  require(report.max_ratio <= 1.0 + 1e-12, "max drift ratio " + fmt(report.max_ratio));
}

// --- criterion 4 -----------------------------------------------------------

void criterion_theorem1() {
  // Hand-computed reference, each term to six significant digits.
  const BoundBreakdown b = theorem1_bound(derived_constants(), std::vector<int>(100, 0));
  const auto close6 = [](Real got, Real want) {
    return std::abs(got - want) <= 1e-6 * std::abs(want);
  };
  require(close6(b.term_init, 0.8), "init term " + fmt(b.term_init));
  require(close6(b.term_hetero, 0.4), "hetero term " + fmt(b.term_hetero));
  require(close6(b.term_variance, 0.002), "variance term " + fmt(b.term_variance));
  require(close6(b.term_drift, 0.0100 / 3.0), "drift term " + fmt(b.term_drift));
  require(close6(b.total, 0.8 + 0.4 + 0.002 + 0.01 / 3.0), "total " + fmt(b.total));

  // Empirical slack on IID and NIID-B runs with run-estimated constants.
  for (const PartitionName name : {PartitionName::kIid, PartitionName::kNiidB}) {
    const TheoryRun tr = theory_run(name, 11);
    const RunBoundInputs inputs = estimate_run_constants(
        reference_model(), tr.run, tr.shards, &tr.plan, tr.hp, 400, 200);
    require(inputs.constants.lk_eta_ok(),
            std::string(partition_name_str(name)) + ": L*K*eta = " +
                fmt(inputs.constants.lk_eta()) + " >= 1, pick a smaller eta");
    const BoundComparison cmp = bound_vs_empirical(reference_model(), tr.run, tr.shards,
                                                   inputs.constants, inputs.schedule);
    require(cmp.slack >= 0.0, std::string(partition_name_str(name)) + ": slack " +
                                  fmt(cmp.slack) + " (bound " + fmt(cmp.bound_total) +
                                  " vs empirical " +
                                  fmt(cmp.empirical_avg_grad_norm_sq) + ")");
  }
}

// --- criterion 5 -----------------------------------------------------------

void criterion_iid_degeneracy() {
  // Heterogeneity of IID vs NIID-B partitions of the same dataset, probed at
  // the same checkpoints (round starts of a NIID-B run).
  const std::uint64_t seed = 11;
  const Dataset dataset = make_synthetic_dataset(reference_data(), seed);
  const auto iid_shards =
      build_partition(PartitionConfig::preset(PartitionName::kIid, 100), dataset, seed);
  const auto niid_shards =
      build_partition(PartitionConfig::preset(PartitionName::kNiidB, 100), dataset, seed);
  const ClusterPlan plan = ClusterPlan::interleaved(100, 10);
  const TheoryRun tr = theory_run(PartitionName::kNiidB, seed);

  std::vector<ParamVector> checkpoints;
  for (std::size_t t = 0; t < tr.run.trajectory.size(); t += 10) {
    checkpoints.push_back(tr.run.trajectory[t]);
  }
  const ModelSpec spec = reference_model();
  const auto lambda_iid = estimate_heterogeneity_max(spec, checkpoints, iid_shards, plan);
  const auto lambda_niid = estimate_heterogeneity_max(spec, checkpoints, niid_shards, plan);
  Real max_iid = 0, max_niid = 0;
  for (Real l : lambda_iid) max_iid = std::max(max_iid, l);
  for (Real l : lambda_niid) max_niid = std::max(max_niid, l);
  require(max_iid <= 1e-2 * max_niid, "lambda^2 IID " + fmt(max_iid) +
                                          " not within 1e-2 of NIID-B " + fmt(max_niid));

  // Dropping the heterogeneity term turns Eq. 8 into the simplified IID
  // form, term for term.
  BoundConstants c = derived_constants();
  c.lambda_sq = {0.0};
  const BoundBreakdown full = theorem1_bound(c, std::vector<int>(100, 0));
  const BoundBreakdown iid = iid_simplified_bound(c);
  require(full.term_init == iid.term_init, "init terms differ");
  require(full.term_variance == iid.term_variance, "variance terms differ");
  require(full.term_drift == iid.term_drift, "drift terms differ");
  require(full.term_hetero == 0.0 && iid.term_hetero == 0.0, "hetero term not zero");
  require(full.total == iid.total, "totals differ");
}

// --- criterion 6 -----------------------------------------------------------

struct AccuracyTable {
  std::map<Method, Real> mean_final;
};

AccuracyTable accuracy_trial(PartitionName name, int repeats) {
  const ModelSpec spec = reference_model();
  HyperParams hp;
  hp.eta = 0.05;
  hp.K = 5;
  hp.T = 200;
  hp.batch_size = 64;

  AccuracyTable table;
  std::map<Method, Real> sums;
  for (int rep = 0; rep < repeats; ++rep) {
    const std::uint64_t seed = 42 + static_cast<std::uint64_t>(rep);
    hp.seed = seed;
    const Dataset dataset = make_synthetic_dataset(reference_data(), seed);
    const auto shards =
        build_partition(PartitionConfig::preset(name, 100), dataset, seed);
    const Batch eval_set = make_eval_batch(seed);

    sums[Method::kFedAvg] +=
        run_fedavg(spec, shards, 10, hp, eval_set).records.back().eval_accuracy;
    sums[Method::kEdgeFlowSeq] +=
        run_edgeflow(spec, shards, ClusterPlan::interleaved(100, 10), hp, eval_set)
            .records.back()
            .eval_accuracy;
    sums[Method::kEdgeFlowRand] +=
        run_edgeflow(spec, shards,
                     ClusterPlan::interleaved(100, 10, SchedulePolicy::kRandom), hp,
                     eval_set)
            .records.back()
            .eval_accuracy;
  }
  for (auto& [method, sum] : sums) table.mean_final[method] = sum / repeats;
  return table;
}

void criterion_accuracy_ordering() {
  const int repeats = 3;
  for (const PartitionName name : {PartitionName::kNiidA, PartitionName::kNiidB}) {
    const AccuracyTable t = accuracy_trial(name, repeats);
    const Real fedavg = t.mean_final.at(Method::kFedAvg);
    const Real seq = t.mean_final.at(Method::kEdgeFlowSeq);
    const Real rand = t.mean_final.at(Method::kEdgeFlowRand);
    std::cout << "    " << partition_name_str(name) << ": fedavg=" << fmt(fedavg)
              << " seq=" << fmt(seq) << " rand=" << fmt(rand) << "\n";
    require(seq >= fedavg - 0.01, std::string(partition_name_str(name)) + ": seq " +
                                      fmt(seq) + " trails fedavg " + fmt(fedavg));
    require(rand >= fedavg - 0.01, std::string(partition_name_str(name)) + ": rand " +
                                       fmt(rand) + " trails fedavg " + fmt(fedavg));
    if (name == PartitionName::kNiidB) {
      require(seq > fedavg || rand > fedavg,
              "no EdgeFLow variant strictly beats FedAvg under NIID B");
    }
  }
  const AccuracyTable iid = accuracy_trial(PartitionName::kIid, repeats);
  const Real fedavg = iid.mean_final.at(Method::kFedAvg);
  std::cout << "    IID: fedavg=" << fmt(fedavg) << " seq="
            << fmt(iid.mean_final.at(Method::kEdgeFlowSeq)) << " rand="
            << fmt(iid.mean_final.at(Method::kEdgeFlowRand)) << "\n";
  for (const Method m : {Method::kEdgeFlowSeq, Method::kEdgeFlowRand}) {
    const Real gap = std::abs(iid.mean_final.at(m) - fedavg);
    require(gap <= 0.02, std::string("IID gap for ") + method_str(m) + " is " + fmt(gap));
  }
}

// --- criterion 7 -----------------------------------------------------------

void criterion_communication() {
  TopologyGraph chain = builtin_topology(TopologyKind::kDepthLinear, {.depth = 4});
  attach_clusters(chain, 4);
  const RoundCommInfo info{0, 1, 10};  // cluster at edge_1, migrating to edge_2
  const std::int64_t fedavg = round_comm_load(CommMethod::kFedAvg, chain, info, 1);
  const std::int64_t edgeflow = round_comm_load(CommMethod::kEdgeFlow, chain, info, 1);
  require(fedavg == 50, "depth-linear FedAvg load " + std::to_string(fedavg));
  require(edgeflow == 11, "depth-linear EdgeFLow load " + std::to_string(edgeflow));
  const Real ratio = compression_ratio(edgeflow, fedavg);
  require(std::abs(ratio - 0.22) < 1e-12, "worked-example ratio " + fmt(ratio));

  ExperimentConfig defaults;  // documented defaults: E=4, b=4, d=4, M=10
  std::map<TopologyKind, Real> edgeflow_ratio;
  std::int64_t edgeflow_sum = 0, fedavg_sum = 0;
  for (const TopoRow& row : topo_report_rows(defaults)) {
    if (row.method == CommMethod::kEdgeFlow) {
      edgeflow_ratio[row.kind] = row.ratio_vs_fedavg;
      edgeflow_sum += row.total;
    } else if (row.method == CommMethod::kFedAvg) {
      fedavg_sum += row.total;
    }
  }
  require(edgeflow_ratio.at(TopologyKind::kDepthLinear) <
              edgeflow_ratio.at(TopologyKind::kBreadthParallel),
          "depth ratio " + fmt(edgeflow_ratio.at(TopologyKind::kDepthLinear)) +
              " not below breadth ratio " +
              fmt(edgeflow_ratio.at(TopologyKind::kBreadthParallel)));
  const Real reduction = 1.0 - compression_ratio(edgeflow_sum, fedavg_sum);
  std::cout << "    overall reduction across builtins: " << fmt(100 * reduction) << "%\n";
  require(reduction >= 0.5 && reduction <= 0.8,
          "overall reduction " + fmt(reduction) + " outside [0.5, 0.8]");
}

// --- criterion 8 -----------------------------------------------------------

void criterion_bound_shape() {
  const BoundConstants base = derived_constants();

  Real prev = std::numeric_limits<Real>::infinity();
  for (const int rounds : {25, 50, 100, 200, 400, 800}) {
    BoundConstants c = base;
    c.T = rounds;
    const Real total = theorem1_bound(c, std::vector<int>(rounds, 0)).total;
    require(total < prev, "total not strictly decreasing in T at T=" +
                              std::to_string(rounds));
    prev = total;
  }

  prev = std::numeric_limits<Real>::infinity();
  for (const int size : {1, 2, 4, 5, 10, 20, 50}) {
    BoundConstants c = base;
    c.N_m = size;
    const Real total = theorem1_bound(c, std::vector<int>(c.T, 0)).total;
    require(total < prev, "total not strictly decreasing in N_m at N_m=" +
                              std::to_string(size));
    prev = total;
  }

  std::vector<Real> by_k;
  for (int k = 1; k <= 50; ++k) {
    BoundConstants c = base;
    c.K = k;
    by_k.push_back(theorem1_bound(c, std::vector<int>(c.T, 0)).total);
  }
  const auto min_it = std::min_element(by_k.begin(), by_k.end());
  const int argmin = static_cast<int>(min_it - by_k.begin()) + 1;
  require(argmin > 1 && argmin < 50,
          "K minimum at boundary (K=" + std::to_string(argmin) + ")");
  require(by_k.front() > *min_it && by_k.back() > *min_it,
          "total(K) fails to rise on both sides of its minimum");
  std::cout << "    interior minimum at K=" << argmin << "\n";
}

// --- criterion 9 -----------------------------------------------------------

void criterion_determinism() {
  const fs::path base = fs::temp_directory_path() / "edgeflow_acceptance_determinism";
  fs::remove_all(base);

  ExperimentConfig config;
  config.model.input_dim = 8;
  config.data.input_dim = 8;
  config.data.samples_per_class = 40;
  config.partition.name = PartitionName::kCustom;
  config.partition.groups = {{10, GroupSetting::kXPctNonIid, 90.0, 1}};
  config.num_clients = 10;
  config.clusters = 5;
  config.hp.eta = 0.05;
  config.hp.K = 3;
  config.hp.T = 10;
  config.hp.batch_size = 16;
  config.repeats = 2;
  config.eval_samples_per_class = 20;
  config.f_star_iterations = 50;
  config.smoothness_probes = 20;

  config.output_dir = (base / "a").string();
  run_experiment(config);
  config.output_dir = (base / "b").string();
  run_experiment(config);

  const auto slurp = [](const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
  };
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("metrics_", 0) == 0) {
      require(slurp(entry.path()) == slurp(base / "b" / name),
              "metrics differ between invocations: " + name);
      ++compared;
    }
  }
  require(compared == 6, "expected 6 metrics files, saw " + std::to_string(compared));
  fs::remove_all(base);
}

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<void()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness vs finite differences", 10, criterion_gradient_correctness},
      {2, "protocol identities (Eq. 3 mean form, M=1 vs FedAvg)", 30,
       criterion_protocol_identities},
      {3, "lemma-3 drift bound on a NIID-B run", 120, criterion_lemma3},
      {4, "theorem-1 numerics and empirical slack", 300, criterion_theorem1},
      {5, "IID degeneracy of heterogeneity and the bound", 300, criterion_iid_degeneracy},
      {6, "accuracy ordering across partitions", 900, criterion_accuracy_ordering},
      {7, "communication accounting and compression band", 5, criterion_communication},
      {8, "bound-shape monotonicities and interior K minimum", 1, criterion_bound_shape},
      {9, "byte-identical metrics across repeated runs", 120, criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && elapsed > criterion.time_limit_s) {
      error = "runtime " + fmt(elapsed) + "s exceeds " + fmt(criterion.time_limit_s) + "s";
    }
    if (error.empty()) {
      std::printf("[PASS] criterion %d: %s (%.1fs)\n", criterion.id,
                  criterion.name.c_str(), elapsed);
    } else {
      std::printf("[FAIL] criterion %d: %s (%.1fs): %s\n", criterion.id,
                  criterion.name.c_str(), elapsed, error.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
