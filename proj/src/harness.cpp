#include "edgeflow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace edgeflow {

namespace {

std::string fmt_real(Real x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  return os;
}

std::vector<int> cyclic_schedule(int rounds, int clusters, int first) {
  std::vector<int> schedule(static_cast<std::size_t>(rounds));
  for (int t = 0; t < rounds; ++t) {
    schedule[static_cast<std::size_t>(t)] = (first + t) % clusters;
  }
  return schedule;
}

// Centered moving average, window truncated at the ends.
std::vector<Real> smooth_curve(const std::vector<Real>& curve, int window) {
  const int half = window / 2;
  std::vector<Real> out(curve.size(), 0.0);
  for (int i = 0; i < static_cast<int>(curve.size()); ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(static_cast<int>(curve.size()) - 1, i + half);
    Real sum = 0;
    for (int j = lo; j <= hi; ++j) sum += curve[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / static_cast<Real>(hi - lo + 1);
  }
  return out;
}

struct CellArtifacts {
  RunResult run;
  CommLedger ledger;
  CommLedger baseline;  // FedAvg comm model over the same schedule
  RunBoundInputs bound_inputs;
  BoundBreakdown breakdown;
  BoundComparison comparison;
  Lemma3Report lemma3;
};

json breakdown_json(const BoundBreakdown& b) {
  return json{{"term_init", b.term_init},
              {"term_hetero", b.term_hetero},
              {"term_variance", b.term_variance},
              {"term_drift", b.term_drift},
              {"total", b.total}};
}

json comparison_json(const BoundComparison& c) {
  return json{{"empirical_avg_grad_norm_sq", c.empirical_avg_grad_norm_sq},
              {"bound_total", c.bound_total},
              {"slack", c.slack},
              {"constants_valid", c.constants_valid}};
}

json constants_json(const BoundConstants& c) {
  return json{{"L", c.L},
              {"G_sq", c.G_sq},
              {"sigma_sq", c.sigma_sq},
              {"lambda_sq", c.lambda_sq},
              {"F0", c.F0},
              {"F_star", c.F_star},
              {"F_star_is_proxy", true},
              {"eta", c.eta},
              {"K", c.K},
              {"T", c.T},
              {"N_m", c.N_m},
              {"lk_eta", c.lk_eta()},
              {"lk_eta_ok", c.lk_eta_ok()}};
}

json lemma3_json(const Lemma3Report& report) {
  json first = json::array();
  for (std::size_t i = 0; i < report.violations.size() && i < 10; ++i) {
    const Lemma3Violation& v = report.violations[i];
    first.push_back(json{{"t", v.t}, {"k", v.k}, {"ratio", v.ratio}});
  }
  return json{{"violations", report.violations.size()},
              {"max_ratio", report.max_ratio},
              {"first_violations", first}};
}

CellArtifacts run_cell(const ExperimentConfig& config, Method method, int repeat,
                       const std::vector<ClientShard>& shards, const Batch& eval_set,
                       const TopologyGraph& graph, const fs::path& out_dir) {
  HyperParams hp = config.hp;
  hp.seed = config.hp.seed + static_cast<std::uint64_t>(repeat);

  CellArtifacts cell;
  const ClusterPlan* plan_ptr = nullptr;
  ClusterPlan plan;
  if (method == Method::kFedAvg) {
    cell.run = run_fedavg(config.model, shards, config.clients_per_cluster(), hp, eval_set);
  } else {
    const SchedulePolicy policy = method == Method::kEdgeFlowSeq
                                      ? SchedulePolicy::kFixedSequence
                                      : SchedulePolicy::kRandom;
    plan = ClusterPlan::interleaved(config.num_clients, config.clusters, policy,
                                    config.first_cluster);
    cell.run = run_edgeflow(config.model, shards, plan, hp, eval_set);
  }
  if (method != Method::kFedAvg) plan_ptr = &plan;

  // Communication accounting. FedAvg has no cluster schedule of its own, so
  // its uploads are billed against the cyclic cluster placement.
  const std::vector<int> comm_schedule =
      cell.run.schedule.empty()
          ? cyclic_schedule(hp.T, config.clusters, config.first_cluster)
          : cell.run.schedule;
  const CommMethod comm_method =
      method == Method::kFedAvg ? CommMethod::kFedAvg : CommMethod::kEdgeFlow;
  const std::int64_t p = config.model.param_count();
  cell.ledger = build_comm_ledger(comm_method, graph, comm_schedule,
                                  config.clients_per_cluster(), p,
                                  config.topology.include_downloads);
  cell.baseline = comm_method == CommMethod::kFedAvg
                      ? cell.ledger
                      : build_comm_ledger(CommMethod::kFedAvg, graph, comm_schedule,
                                          config.clients_per_cluster(), p,
                                          config.topology.include_downloads);

  cell.bound_inputs = estimate_run_constants(config.model, cell.run, shards, plan_ptr, hp,
                                             config.f_star_iterations,
                                             config.smoothness_probes);
  cell.breakdown = theorem1_bound(cell.bound_inputs.constants, cell.bound_inputs.schedule);
  cell.comparison = bound_vs_empirical(config.model, cell.run, shards,
                                       cell.bound_inputs.constants,
                                       cell.bound_inputs.schedule);
  cell.lemma3 = check_lemma3(cell.run.records, hp.eta, cell.bound_inputs.constants.G_sq);

  const std::string tag = std::string(method_str(method)) + "_rep" + std::to_string(repeat);

  {
    std::ofstream os = open_out(out_dir / ("metrics_" + tag + ".csv"));
    os << "t,method,cluster,loss,acc,params_hop_units\n";
    for (std::size_t t = 0; t < cell.run.records.size(); ++t) {
      const RoundRecord& rec = cell.run.records[t];
      os << rec.t << "," << method_str(method) << "," << rec.cluster_id << ","
         << fmt_real(rec.global_loss) << "," << fmt_real(rec.eval_accuracy) << ","
         << cell.ledger.entries[t].params_hop_units << "\n";
    }
  }
  {
    // The cell's own entries first, then the FedAvg counterfactual over the
    // same schedule so the compression ratio can be recomputed from the CSV.
    CommLedger combined = cell.ledger;
    if (comm_method != CommMethod::kFedAvg) {
      combined.entries.insert(combined.entries.end(), cell.baseline.entries.begin(),
                              cell.baseline.entries.end());
    }
    std::ofstream os = open_out(out_dir / ("ledger_" + tag + ".csv"));
    export_ledger_csv(os, combined);
  }
  {
    json doc{{"method", method_str(method)},
             {"repeat", repeat},
             {"constants", constants_json(cell.bound_inputs.constants)},
             {"breakdown", breakdown_json(cell.breakdown)},
             {"comparison", comparison_json(cell.comparison)},
             {"lemma3", lemma3_json(cell.lemma3)}};
    std::ofstream os = open_out(out_dir / ("bounds_" + tag + ".json"));
    os << doc.dump(2) << "\n";
  }
  if (config.checkpoint_interval > 0) {
    const fs::path ckpt_dir = out_dir / "checkpoints";
    fs::create_directories(ckpt_dir);
    for (int t = config.checkpoint_interval; t <= hp.T; t += config.checkpoint_interval) {
      save_params_file((ckpt_dir / (tag + "_t" + std::to_string(t) + ".bin")).string(),
                       cell.run.trajectory[static_cast<std::size_t>(t)]);
    }
  }
  return cell;
}

}  // namespace

std::string resolve_output_dir(const std::string& dir) {
  const char* root = std::getenv("EDGEFLOW_OUTPUT_ROOT");
  if (root != nullptr && root[0] != '\0' && !fs::path(dir).is_absolute()) {
    return (fs::path(root) / dir).string();
  }
  return dir;
}

std::vector<TopoRow> topo_report_rows(const ExperimentConfig& config) {
  config.validate();
  const bool random_only =
      std::find(config.methods.begin(), config.methods.end(), Method::kEdgeFlowSeq) ==
          config.methods.end() &&
      std::find(config.methods.begin(), config.methods.end(), Method::kEdgeFlowRand) !=
          config.methods.end();

  std::vector<int> schedule;
  if (random_only) {
    SplitRng rng = SplitRng(config.hp.seed).split(stream::kSchedule);
    for (int t = 0; t < config.hp.T; ++t) {
      schedule.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(config.clusters))));
    }
  } else {
    schedule = cyclic_schedule(config.hp.T, config.clusters, config.first_cluster);
  }

  const std::int64_t p = config.model.param_count();
  std::vector<TopoRow> rows;
  for (TopologyKind kind : {TopologyKind::kSimple, TopologyKind::kBreadthParallel,
                            TopologyKind::kDepthLinear, TopologyKind::kHybrid}) {
    TopologyGraph graph = builtin_topology(kind, config.topology.size);
    graph.route_via_cloud = config.topology.route_via_cloud;
    attach_clusters(graph, config.clusters);

    std::int64_t fedavg_total = 0;
    for (CommMethod method :
         {CommMethod::kFedAvg, CommMethod::kHierFl, CommMethod::kEdgeFlow}) {
      const CommLedger ledger =
          build_comm_ledger(method, graph, schedule, config.clients_per_cluster(), p,
                            config.topology.include_downloads);
      TopoRow row;
      row.kind = kind;
      row.method = method;
      row.total = ledger.total();
      if (method == CommMethod::kFedAvg) fedavg_total = row.total;
      row.ratio_vs_fedavg = compression_ratio(row.total, fedavg_total);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<TopoRow> topo_report(const ExperimentConfig& config) {
  const std::vector<TopoRow> rows = topo_report_rows(config);
  const fs::path out_dir = resolve_output_dir(config.output_dir);
  fs::create_directories(out_dir);

  std::ofstream os = open_out(out_dir / "topo_report.csv");
  os << "topology,method,total_params_hop_units,ratio_vs_fedavg\n";
  for (const TopoRow& row : rows) {
    os << topology_kind_str(row.kind) << "," << comm_method_str(row.method) << ","
       << row.total << "," << fmt_real(row.ratio_vs_fedavg) << "\n";
  }

  for (TopologyKind kind : {TopologyKind::kSimple, TopologyKind::kBreadthParallel,
                            TopologyKind::kDepthLinear, TopologyKind::kHybrid}) {
    TopologyGraph graph = builtin_topology(kind, config.topology.size);
    attach_clusters(graph, config.clusters);
    save_topology_file(
        (out_dir / ("topo_" + std::string(topology_kind_str(kind)) + ".txt")).string(),
        graph);
  }
  return rows;
}

RunSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.hp.T < 1) throw ConfigError("run needs at least one round");

  const fs::path out_dir = resolve_output_dir(config.output_dir);
  fs::create_directories(out_dir);
  const TopologyGraph graph = build_topology(config.topology, config.clusters);

  RunSummary summary;
  summary.partition = partition_name_str(config.partition.name);
  summary.output_dir = out_dir.string();

  DatasetSpec eval_spec = config.data;
  eval_spec.samples_per_class = config.eval_samples_per_class;

  struct CellSlot {
    bool ok = false;
    std::string error;
    CellArtifacts cell;
  };
  std::vector<std::vector<CellSlot>> cells(
      config.methods.size(), std::vector<CellSlot>(static_cast<std::size_t>(config.repeats)));

  for (int rep = 0; rep < config.repeats; ++rep) {
    const std::uint64_t seed = config.hp.seed + static_cast<std::uint64_t>(rep);
    const Dataset dataset = make_synthetic_dataset(config.data, seed);
    const std::uint64_t eval_seed = SplitRng(seed).split(stream::kEval).next_u64();
    const Dataset eval_dataset = make_synthetic_dataset(eval_spec, eval_seed);
    const Batch eval_batch = eval_dataset.as_batch();
    const std::vector<ClientShard> shards =
        build_partition(config.partition, dataset, seed);
    if (config.export_shards) {
      std::ofstream os = open_out(out_dir / ("shards_rep" + std::to_string(rep) + ".csv"));
      export_shards_csv(os, shards);
    }

    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      CellSlot& slot = cells[mi][static_cast<std::size_t>(rep)];
      try {
        slot.cell = run_cell(config, config.methods[mi], rep, shards, eval_batch, graph,
                             out_dir);
        slot.ok = true;
      } catch (const std::exception& e) {
        slot.error = e.what();
        summary.any_failed = true;
        std::cerr << "cell " << method_str(config.methods[mi]) << " rep " << rep
                  << " failed: " << e.what() << "\n";
      }
    }
  }

  json summary_methods = json::object();
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    const Method method = config.methods[mi];
    MethodSummary ms;
    ms.method = method;

    std::vector<Real> finals;
    std::vector<Real> thresholds;
    for (int rep = 0; rep < config.repeats; ++rep) {
      const CellSlot& slot = cells[mi][static_cast<std::size_t>(rep)];
      if (!slot.ok) {
        ms.failures.push_back("rep" + std::to_string(rep) + ": " + slot.error);
        continue;
      }
      const RunResult& run = slot.cell.run;
      std::vector<Real> curve;
      curve.reserve(run.records.size());
      for (const RoundRecord& rec : run.records) curve.push_back(rec.eval_accuracy);
      ms.accuracy_curves.push_back(curve);

      const Real final_acc = curve.back();
      finals.push_back(final_acc);
      int reach = static_cast<int>(curve.size()) - 1;
      for (std::size_t t = 0; t < curve.size(); ++t) {
        if (curve[t] >= 0.9 * final_acc) {
          reach = static_cast<int>(t);
          break;
        }
      }
      thresholds.push_back(static_cast<Real>(reach));
      ms.total_params_hop_units += slot.cell.ledger.total();
      ms.lemma3_violations += static_cast<int>(slot.cell.lemma3.violations.size());
      ms.lemma3_max_ratio = std::max(ms.lemma3_max_ratio, slot.cell.lemma3.max_ratio);
      if (rep == 0) {
        ms.bound = slot.cell.breakdown;
        ms.comparison = slot.cell.comparison;
        ms.lk_eta = slot.cell.bound_inputs.constants.lk_eta();
        ms.lk_eta_ok = slot.cell.bound_inputs.constants.lk_eta_ok();
      }
    }
    if (!finals.empty()) {
      Real mean = 0;
      for (Real f : finals) mean += f;
      mean /= static_cast<Real>(finals.size());
      Real var = 0;
      for (Real f : finals) var += (f - mean) * (f - mean);
      var /= static_cast<Real>(finals.size());
      ms.final_accuracy_mean = mean;
      ms.final_accuracy_std = std::sqrt(var);
      Real thr = 0;
      for (Real t : thresholds) thr += t;
      ms.rounds_to_threshold = thr / static_cast<Real>(thresholds.size());
    }
    summary.methods.push_back(ms);
  }

  // Compression is billed against the FedAvg comm model over each method's
  // own schedule, summed across surviving repeats.
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    MethodSummary& ms = summary.methods[mi];
    std::int64_t fedavg_units = 0;
    for (int rep = 0; rep < config.repeats; ++rep) {
      const CellSlot& slot = cells[mi][static_cast<std::size_t>(rep)];
      if (!slot.ok) continue;
      fedavg_units += slot.cell.baseline.total();
    }
    if (fedavg_units > 0) {
      ms.compression_ratio_vs_fedavg =
          compression_ratio(ms.total_params_hop_units, fedavg_units);
    }
  }

  // Plot data: per-method mean accuracy curves (and smoothed variants).
  {
    std::size_t rounds = 0;
    for (const MethodSummary& ms : summary.methods) {
      if (!ms.accuracy_curves.empty()) rounds = ms.accuracy_curves.front().size();
    }
    if (rounds > 0) {
      std::vector<std::vector<Real>> mean_curves;
      for (const MethodSummary& ms : summary.methods) {
        std::vector<Real> mean(rounds, 0.0);
        if (!ms.accuracy_curves.empty()) {
          for (const std::vector<Real>& curve : ms.accuracy_curves) {
            for (std::size_t t = 0; t < rounds; ++t) mean[t] += curve[t];
          }
          for (Real& v : mean) v /= static_cast<Real>(ms.accuracy_curves.size());
        }
        mean_curves.push_back(mean);
      }
      std::ofstream os = open_out(out_dir / "plot_accuracy.csv");
      os << "t";
      for (const MethodSummary& ms : summary.methods) os << "," << method_str(ms.method);
      if (config.smooth_curves) {
        for (const MethodSummary& ms : summary.methods) {
          os << "," << method_str(ms.method) << "_smooth";
        }
      }
      os << "\n";
      std::vector<std::vector<Real>> smoothed;
      if (config.smooth_curves) {
        for (const std::vector<Real>& c : mean_curves) {
          smoothed.push_back(smooth_curve(c, config.smooth_window));
        }
      }
      for (std::size_t t = 0; t < rounds; ++t) {
        os << t;
        for (const std::vector<Real>& c : mean_curves) os << "," << fmt_real(c[t]);
        for (const std::vector<Real>& c : smoothed) os << "," << fmt_real(c[t]);
        os << "\n";
      }
    }
  }

  // Load-vs-topology plot data.
  {
    const std::vector<TopoRow> rows = topo_report_rows(config);
    std::ofstream os = open_out(out_dir / "plot_load.csv");
    os << "topology,method,total_params_hop_units,ratio_vs_fedavg\n";
    for (const TopoRow& row : rows) {
      os << topology_kind_str(row.kind) << "," << comm_method_str(row.method) << ","
         << row.total << "," << fmt_real(row.ratio_vs_fedavg) << "\n";
    }
  }

  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    const MethodSummary& ms = summary.methods[mi];
    json m{{"final_accuracy_mean", ms.final_accuracy_mean},
           {"final_accuracy_std", ms.final_accuracy_std},
           {"rounds_to_threshold", ms.rounds_to_threshold},
           {"total_params_hop_units", ms.total_params_hop_units},
           {"compression_ratio_vs_fedavg", ms.compression_ratio_vs_fedavg},
           {"bound", breakdown_json(ms.bound)},
           {"bound_comparison", comparison_json(ms.comparison)},
           {"lk_eta", ms.lk_eta},
           {"lk_eta_ok", ms.lk_eta_ok},
           {"lemma3_violations", ms.lemma3_violations},
           {"lemma3_max_ratio", ms.lemma3_max_ratio},
           {"failed_cells", ms.failures}};
    summary_methods[method_str(ms.method)] = m;
  }
  json doc{{"partition", summary.partition},
           {"clients", config.num_clients},
           {"clusters", config.clusters},
           {"repeats", config.repeats},
           {"rounds", config.hp.T},
           {"methods", summary_methods}};
  std::ofstream os = open_out(out_dir / "summary.json");
  os << doc.dump(2) << "\n";

  return summary;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "N_m") return SweepAxis::kClusterSize;
  if (name == "K") return SweepAxis::kLocalSteps;
  throw ConfigError("sweep axis must be N_m or K, got '" + name + "'");
}

std::vector<SweepCell> sweep_experiment(const ExperimentConfig& config, SweepAxis axis,
                                        const std::vector<int>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  const std::string axis_name = axis == SweepAxis::kClusterSize ? "N_m" : "K";
  const fs::path out_dir = resolve_output_dir(config.output_dir);
  fs::create_directories(out_dir);

  std::vector<SweepCell> cells;
  for (int value : values) {
    ExperimentConfig sub = config;
    if (axis == SweepAxis::kClusterSize) {
      if (value < 1 || config.num_clients % value != 0) {
        throw ConfigError("cluster size " + std::to_string(value) + " must divide N=" +
                          std::to_string(config.num_clients));
      }
      sub.clusters = config.num_clients / value;
    } else {
      if (value < 1) throw ConfigError("K must be positive");
      sub.hp.K = value;
    }
    sub.output_dir =
        (fs::path(config.output_dir) / ("sweep_" + axis_name + "_" + std::to_string(value)))
            .string();
    SweepCell cell;
    cell.value = value;
    cell.summary = run_experiment(sub);
    cells.push_back(std::move(cell));
  }

  // Cross-value accuracy curves, one column per (method, value).
  {
    std::size_t rounds = 0;
    for (const SweepCell& cell : cells) {
      for (const MethodSummary& ms : cell.summary.methods) {
        if (!ms.accuracy_curves.empty()) rounds = ms.accuracy_curves.front().size();
      }
    }
    std::ofstream os = open_out(out_dir / ("sweep_" + axis_name + "_accuracy.csv"));
    os << "t";
    for (const SweepCell& cell : cells) {
      for (const MethodSummary& ms : cell.summary.methods) {
        os << "," << method_str(ms.method) << "_" << axis_name << cell.value;
      }
    }
    os << "\n";
    for (std::size_t t = 0; t < rounds; ++t) {
      os << t;
      for (const SweepCell& cell : cells) {
        for (const MethodSummary& ms : cell.summary.methods) {
          Real mean = 0;
          if (!ms.accuracy_curves.empty()) {
            for (const std::vector<Real>& c : ms.accuracy_curves) mean += c[t];
            mean /= static_cast<Real>(ms.accuracy_curves.size());
          }
          os << "," << fmt_real(mean);
        }
      }
      os << "\n";
    }
  }

  // Final-accuracy table with the best value flagged per method.
  {
    std::ofstream os = open_out(out_dir / ("sweep_" + axis_name + "_final.csv"));
    os << "axis,value,method,final_accuracy_mean,final_accuracy_std,rounds_to_threshold,"
          "is_best\n";
    for (const SweepCell& cell : cells) {
      for (const MethodSummary& ms : cell.summary.methods) {
        bool best = true;
        for (const SweepCell& other : cells) {
          for (const MethodSummary& oms : other.summary.methods) {
            if (oms.method == ms.method &&
                oms.final_accuracy_mean > ms.final_accuracy_mean) {
              best = false;
            }
          }
        }
        os << axis_name << "," << cell.value << "," << method_str(ms.method) << ","
           << fmt_real(ms.final_accuracy_mean) << "," << fmt_real(ms.final_accuracy_std)
           << "," << fmt_real(ms.rounds_to_threshold) << "," << (best ? 1 : 0) << "\n";
      }
    }
  }
  return cells;
}

int bound_report(const std::string& run_dir, std::ostream& os) {
  const fs::path dir = resolve_output_dir(run_dir);
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("bounds_", 0) == 0 && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  int count = 0;
  for (const fs::path& file : files) {
    std::ifstream is(file);
    json doc = json::parse(is);
    const auto& b = doc.at("breakdown");
    const auto& c = doc.at("comparison");
    const auto& l = doc.at("lemma3");
    os << doc.at("method").get<std::string>() << " rep "
       << doc.at("repeat").get<int>() << ": total=" << fmt_real(b.at("total").get<Real>())
       << " (init=" << fmt_real(b.at("term_init").get<Real>())
       << " hetero=" << fmt_real(b.at("term_hetero").get<Real>())
       << " variance=" << fmt_real(b.at("term_variance").get<Real>())
       << " drift=" << fmt_real(b.at("term_drift").get<Real>())
       << ") empirical=" << fmt_real(c.at("empirical_avg_grad_norm_sq").get<Real>())
       << " slack=" << fmt_real(c.at("slack").get<Real>())
       << " lk_eta_ok=" << (doc.at("constants").at("lk_eta_ok").get<bool>() ? "yes" : "no")
       << " lemma3_violations=" << l.at("violations").get<std::size_t>() << "\n";
    ++count;
  }
  return count;
}

}  // namespace edgeflow
