#pragma once

#include <string>
#include <vector>

#include "edgeflow/data.hpp"
#include "edgeflow/engine.hpp"
#include "edgeflow/topology.hpp"
#include "edgeflow/types.hpp"

namespace edgeflow {

enum class Method { kFedAvg, kEdgeFlowRand, kEdgeFlowSeq };

const char* method_str(Method method);

struct TopologyConfig {
  TopologyKind kind = TopologyKind::kSimple;
  TopologySize size;
  std::string file;  // custom topologies
  bool route_via_cloud = false;
  bool include_downloads = false;
};

// Full experiment description. Defaults follow the reference setup: 100
// clients in 10 clusters of 10, batch 64, K=5, T=200.
struct ExperimentConfig {
  ModelSpec model;
  DatasetSpec data;
  PartitionConfig partition = PartitionConfig::preset(PartitionName::kIid, 100);
  int num_clients = 100;
  int clusters = 10;
  int first_cluster = 0;
  HyperParams hp;
  TopologyConfig topology;
  std::vector<Method> methods = {Method::kFedAvg, Method::kEdgeFlowRand,
                                 Method::kEdgeFlowSeq};
  std::string output_dir = "out";
  int repeats = 1;
  Index eval_samples_per_class = 200;
  int checkpoint_interval = 0;  // rounds between checkpoint files; 0 disables
  bool export_shards = false;   // write the per-repeat shard CSV
  bool smooth_curves = true;
  int smooth_window = 5;
  int f_star_iterations = 400;
  int smoothness_probes = 200;

  int clients_per_cluster() const { return num_clients / clusters; }
  void validate() const;
};

// Key-value sections, '#' comments. Errors carry the offending line number.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

TopologyGraph build_topology(const TopologyConfig& config, int num_clusters);

}  // namespace edgeflow
