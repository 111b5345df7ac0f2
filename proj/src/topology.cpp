#include "edgeflow/topology.hpp"

#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace edgeflow {

const char* topology_kind_str(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::kSimple: return "simple";
    case TopologyKind::kBreadthParallel: return "breadth_parallel";
    case TopologyKind::kDepthLinear: return "depth_linear";
    case TopologyKind::kHybrid: return "hybrid";
    case TopologyKind::kCustom: return "custom";
  }
  return "?";
}

const char* comm_method_str(CommMethod method) {
  switch (method) {
    case CommMethod::kFedAvg: return "fedavg";
    case CommMethod::kHierFl: return "hier_fl";
    case CommMethod::kEdgeFlow: return "edgeflow";
  }
  return "?";
}

int TopologyGraph::edge_of_cluster(int cluster) const {
  if (cluster < 0 || cluster >= static_cast<int>(cluster_edge.size())) {
    throw TopologyError("cluster " + std::to_string(cluster) +
                        " is not mapped to an edge node");
  }
  return cluster_edge[static_cast<std::size_t>(cluster)];
}

int TopologyGraph::find_node(const std::string& name) const {
  for (int i = 0; i < num_nodes(); ++i) {
    if (node_names[static_cast<std::size_t>(i)] == name) return i;
  }
  return -1;
}

void TopologyGraph::validate() const {
  if (num_nodes() < 2) throw TopologyError("topology needs a cloud and an edge node");
  if (node_names[0] != "cloud") throw TopologyError("node 0 must be the cloud");
  for (int i = 1; i < num_nodes(); ++i) {
    if (node_names[static_cast<std::size_t>(i)] == "cloud") {
      throw TopologyError("more than one cloud node");
    }
  }
  for (int i = 0; i < num_nodes(); ++i) {
    (void)hops(*this, 0, i);  // throws when disconnected
  }
  for (std::size_t c = 0; c < cluster_edge.size(); ++c) {
    const int e = cluster_edge[c];
    if (e <= 0 || e >= num_nodes()) {
      throw TopologyError("cluster " + std::to_string(c) + " attached to invalid node");
    }
  }
}

namespace {

void add_link(TopologyGraph& g, int a, int b) {
  g.adjacency[static_cast<std::size_t>(a)].push_back(b);
  g.adjacency[static_cast<std::size_t>(b)].push_back(a);
}

int add_node(TopologyGraph& g, const std::string& name) {
  g.node_names.push_back(name);
  g.adjacency.emplace_back();
  return g.num_nodes() - 1;
}

// BFS over the graph, optionally treating one node as absent.
int bfs_hops(const TopologyGraph& g, int a, int b, int skip) {
  if (a == b) return 0;
  std::vector<int> dist(static_cast<std::size_t>(g.num_nodes()), -1);
  std::deque<int> queue{a};
  dist[static_cast<std::size_t>(a)] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : g.adjacency[static_cast<std::size_t>(u)]) {
      if (v == skip || dist[static_cast<std::size_t>(v)] >= 0) continue;
      dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
      if (v == b) return dist[static_cast<std::size_t>(v)];
      queue.push_back(v);
    }
  }
  return -1;
}

}  // namespace

TopologyGraph builtin_topology(TopologyKind kind, const TopologySize& size) {
  TopologyGraph g;
  g.kind = kind;
  add_node(g, "cloud");
  switch (kind) {
    case TopologyKind::kSimple: {
      if (size.edges < 1) throw TopologyError("simple topology needs at least one edge");
      for (int i = 1; i <= size.edges; ++i) {
        const int e = add_node(g, "edge_" + std::to_string(i));
        g.edge_nodes.push_back(e);
        add_link(g, g.cloud(), e);
      }
      break;
    }
    case TopologyKind::kBreadthParallel: {
      if (size.breadth < 1) throw TopologyError("breadth must be positive");
      const int gateway = add_node(g, "gateway");
      add_link(g, g.cloud(), gateway);
      for (int i = 1; i <= size.breadth; ++i) {
        const int e = add_node(g, "edge_" + std::to_string(i));
        g.edge_nodes.push_back(e);
        add_link(g, gateway, e);
      }
      break;
    }
    case TopologyKind::kDepthLinear: {
      if (size.depth < 1) throw TopologyError("depth must be positive");
      // edge_1 is the far end of the chain; edge_d neighbors the cloud.
      int prev = -1;
      for (int i = 1; i <= size.depth; ++i) {
        const int e = add_node(g, "edge_" + std::to_string(i));
        g.edge_nodes.push_back(e);
        if (prev >= 0) add_link(g, prev, e);
        prev = e;
      }
      add_link(g, prev, g.cloud());
      break;
    }
    case TopologyKind::kHybrid: {
      if (size.breadth < 1 || size.depth < 1) {
        throw TopologyError("hybrid needs positive breadth and depth");
      }
      for (int c = 1; c <= size.breadth; ++c) {
        int prev = -1;
        for (int i = 1; i <= size.depth; ++i) {
          const int e =
              add_node(g, "edge_" + std::to_string(c) + "_" + std::to_string(i));
          g.edge_nodes.push_back(e);
          if (prev >= 0) add_link(g, prev, e);
          prev = e;
        }
        add_link(g, prev, g.cloud());
      }
      break;
    }
    case TopologyKind::kCustom:
      throw TopologyError("custom topologies come from a topology file");
  }
  return g;
}

void attach_clusters(TopologyGraph& graph, int num_clusters) {
  if (graph.edge_nodes.empty()) throw TopologyError("topology has no edge nodes");
  if (num_clusters < 1) throw TopologyError("cluster count must be positive");
  graph.cluster_edge.resize(static_cast<std::size_t>(num_clusters));
  for (int m = 0; m < num_clusters; ++m) {
    graph.cluster_edge[static_cast<std::size_t>(m)] =
        graph.edge_nodes[static_cast<std::size_t>(m) % graph.edge_nodes.size()];
  }
}

int hops(const TopologyGraph& graph, int a, int b) {
  if (a < 0 || a >= graph.num_nodes() || b < 0 || b >= graph.num_nodes()) {
    throw TopologyError("hop query on unknown node");
  }
  const int d = bfs_hops(graph, a, b, -1);
  if (d < 0) {
    throw TopologyError("nodes " + graph.node_names[static_cast<std::size_t>(a)] + " and " +
                        graph.node_names[static_cast<std::size_t>(b)] + " are disconnected");
  }
  return d;
}

int migration_hops(const TopologyGraph& graph, int edge_a, int edge_b) {
  if (edge_a == edge_b) return 0;
  if (!graph.route_via_cloud) {
    const int d = bfs_hops(graph, edge_a, edge_b, graph.cloud());
    if (d >= 0) return d;
    // No cloudless route; fall through to whatever the graph offers.
  }
  return hops(graph, edge_a, edge_b);
}

std::int64_t round_comm_load(CommMethod method, const TopologyGraph& graph,
                             const RoundCommInfo& info, std::int64_t model_size,
                             bool include_downloads) {
  if (info.n_clients < 0) throw TopologyError("negative client count");
  const int edge = graph.edge_of_cluster(info.cluster);
  const std::int64_t n = info.n_clients;
  const std::int64_t p = model_size;
  std::int64_t load = 0;
  switch (method) {
    case CommMethod::kFedAvg:
      // Every client model rides one hop to its edge and on to the cloud.
      load = n * p * (1 + hops(graph, edge, graph.cloud()));
      break;
    case CommMethod::kHierFl:
      // Clients to the edge, one aggregate up to the cloud.
      load = n * p + p * hops(graph, edge, graph.cloud());
      break;
    case CommMethod::kEdgeFlow: {
      // Clients to the edge, one migration to the next scheduled edge.
      std::int64_t migration = 0;
      if (info.next_cluster >= 0) {
        migration = migration_hops(graph, edge, graph.edge_of_cluster(info.next_cluster));
      }
      load = n * p + p * migration;
      break;
    }
  }
  // Downloads mirror the upload path; the flag simply doubles the figure.
  return include_downloads ? 2 * load : load;
}

std::int64_t CommLedger::total() const {
  std::int64_t sum = 0;
  for (const CommEntry& e : entries) sum += e.params_hop_units;
  return sum;
}

void CommLedger::append(const CommEntry& entry) {
  if (entry.params_hop_units < 0 || entry.uploads < 0) {
    throw TopologyError("ledger entries must be nonnegative");
  }
  entries.push_back(entry);
}

CommLedger build_comm_ledger(CommMethod method, const TopologyGraph& graph,
                             const std::vector<int>& schedule, int n_clients,
                             std::int64_t model_size, bool include_downloads) {
  CommLedger ledger;
  for (std::size_t t = 0; t < schedule.size(); ++t) {
    RoundCommInfo info;
    info.cluster = schedule[t];
    info.next_cluster = (t + 1 < schedule.size()) ? schedule[t + 1] : -1;
    info.n_clients = n_clients;

    CommEntry entry;
    entry.t = static_cast<int>(t);
    entry.method = method;
    entry.params_hop_units =
        round_comm_load(method, graph, info, model_size, include_downloads);
    entry.uploads = n_clients;
    if (method == CommMethod::kHierFl) {
      entry.uploads += 1;
    } else if (method == CommMethod::kEdgeFlow && info.next_cluster >= 0 &&
               info.next_cluster != info.cluster) {
      entry.uploads += 1;
    }
    ledger.append(entry);
  }
  return ledger;
}

Real compression_ratio(std::int64_t edgeflow_total, std::int64_t baseline_total) {
  if (baseline_total <= 0) throw ConfigError("compression ratio needs a positive baseline");
  return static_cast<Real>(edgeflow_total) / static_cast<Real>(baseline_total);
}

void save_topology(std::ostream& os, const TopologyGraph& graph) {
  os << "topology " << topology_kind_str(graph.kind) << "\n";
  if (graph.route_via_cloud) os << "route_via_cloud true\n";
  for (const std::string& name : graph.node_names) os << "node " << name << "\n";
  for (int a = 0; a < graph.num_nodes(); ++a) {
    for (int b : graph.adjacency[static_cast<std::size_t>(a)]) {
      if (a < b) {
        os << "link " << graph.node_names[static_cast<std::size_t>(a)] << " "
           << graph.node_names[static_cast<std::size_t>(b)] << "\n";
      }
    }
  }
  for (std::size_t m = 0; m < graph.cluster_edge.size(); ++m) {
    os << "attach " << m << " "
       << graph.node_names[static_cast<std::size_t>(graph.cluster_edge[m])] << "\n";
  }
}

TopologyGraph load_topology(std::istream& is) {
  TopologyGraph g;
  g.kind = TopologyKind::kCustom;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string verb;
    if (!(ls >> verb) || verb[0] == '#') continue;
    if (verb == "topology") {
      std::string kind;
      ls >> kind;  // informational; loaded graphs stay kCustom
    } else if (verb == "route_via_cloud") {
      std::string flag;
      ls >> flag;
      g.route_via_cloud = (flag == "true" || flag == "1");
    } else if (verb == "node") {
      std::string name;
      if (!(ls >> name)) throw ParseError("node line needs a name", line_no);
      if (g.find_node(name) >= 0) throw ParseError("duplicate node " + name, line_no);
      const int id = add_node(g, name);
      if (name != "cloud") g.edge_nodes.push_back(id);
    } else if (verb == "link") {
      std::string na, nb;
      if (!(ls >> na >> nb)) throw ParseError("link line needs two node names", line_no);
      const int a = g.find_node(na);
      const int b = g.find_node(nb);
      if (a < 0 || b < 0) throw ParseError("link references unknown node", line_no);
      add_link(g, a, b);
    } else if (verb == "attach") {
      int cluster = -1;
      std::string name;
      if (!(ls >> cluster >> name)) {
        throw ParseError("attach line needs a cluster id and node name", line_no);
      }
      const int e = g.find_node(name);
      if (e < 0) throw ParseError("attach references unknown node " + name, line_no);
      if (static_cast<int>(g.cluster_edge.size()) <= cluster) {
        g.cluster_edge.resize(static_cast<std::size_t>(cluster) + 1, -1);
      }
      g.cluster_edge[static_cast<std::size_t>(cluster)] = e;
    } else {
      throw ParseError("unknown topology directive '" + verb + "'", line_no);
    }
  }
  g.validate();
  return g;
}

void save_topology_file(const std::string& path, const TopologyGraph& graph) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  save_topology(os, graph);
}

TopologyGraph load_topology_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  return load_topology(is);
}

void export_ledger_csv(std::ostream& os, const CommLedger& ledger) {
  os << "t,method,params_hop_units\n";
  for (const CommEntry& e : ledger.entries) {
    os << e.t << "," << comm_method_str(e.method) << "," << e.params_hop_units << "\n";
  }
}

}  // namespace edgeflow
