#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "edgeflow/types.hpp"

namespace edgeflow {

enum class TopologyKind { kSimple, kBreadthParallel, kDepthLinear, kHybrid, kCustom };

enum class CommMethod { kFedAvg, kHierFl, kEdgeFlow };

const char* topology_kind_str(TopologyKind kind);
const char* comm_method_str(CommMethod method);

// Undirected unit-cost graph of one cloud node and edge base stations, with
// clusters attached to edge nodes. Node 0 is always the cloud.
struct TopologyGraph {
  TopologyKind kind = TopologyKind::kCustom;
  std::vector<std::string> node_names;
  std::vector<std::vector<int>> adjacency;
  std::vector<int> edge_nodes;    // edge node ids in generator order
  std::vector<int> cluster_edge;  // cluster id -> edge node id
  bool route_via_cloud = false;   // force migrations onto the full graph

  int cloud() const { return 0; }
  int num_nodes() const { return static_cast<int>(node_names.size()); }
  int edge_of_cluster(int cluster) const;
  int find_node(const std::string& name) const;  // -1 when absent
  void validate() const;
};

struct TopologySize {
  int edges = 4;     // simple
  int breadth = 4;   // breadth_parallel / hybrid chains
  int depth = 4;     // depth_linear / hybrid chain length
};

TopologyGraph builtin_topology(TopologyKind kind, const TopologySize& size = {});

// Round-robin cluster attachment over the edge nodes.
void attach_clusters(TopologyGraph& graph, int num_clusters);

// Shortest-path hop count via BFS.
int hops(const TopologyGraph& graph, int a, int b);

// Hop count for an edge-to-edge model migration. The cloud is skipped as a
// relay unless route_via_cloud is set or the edge subgraph leaves the pair
// disconnected.
int migration_hops(const TopologyGraph& graph, int edge_a, int edge_b);

struct RoundCommInfo {
  int cluster = 0;
  int next_cluster = -1;  // -1: final round, no migration
  int n_clients = 0;
};

// Parameter-hop units moved in one round, upload direction only.
std::int64_t round_comm_load(CommMethod method, const TopologyGraph& graph,
                             const RoundCommInfo& info, std::int64_t model_size,
                             bool include_downloads = false);

struct CommEntry {
  int t = 0;
  CommMethod method = CommMethod::kFedAvg;
  std::int64_t params_hop_units = 0;
  std::int64_t uploads = 0;
};

struct CommLedger {
  std::vector<CommEntry> entries;

  std::int64_t total() const;
  void append(const CommEntry& entry);
};

// Per-round accounting of a whole schedule under one method.
CommLedger build_comm_ledger(CommMethod method, const TopologyGraph& graph,
                             const std::vector<int>& schedule, int n_clients,
                             std::int64_t model_size, bool include_downloads = false);

// EdgeFLow transmitted volume over the baseline's; lower is better.
Real compression_ratio(std::int64_t edgeflow_total, std::int64_t baseline_total);

// Structured text format: node / link / attach lines.
void save_topology(std::ostream& os, const TopologyGraph& graph);
TopologyGraph load_topology(std::istream& is);
void save_topology_file(const std::string& path, const TopologyGraph& graph);
TopologyGraph load_topology_file(const std::string& path);

void export_ledger_csv(std::ostream& os, const CommLedger& ledger);

}  // namespace edgeflow
