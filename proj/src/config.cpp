#include "edgeflow/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace edgeflow {

const char* method_str(Method method) {
  switch (method) {
    case Method::kFedAvg: return "fedavg";
    case Method::kEdgeFlowRand: return "edgeflow_rand";
    case Method::kEdgeFlowSeq: return "edgeflow_seq";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  model.validate();
  data.validate();
  partition.validate();
  hp.validate();
  if (num_clients < 1) throw ConfigError("clients must be positive");
  if (partition.total_clients() != num_clients) {
    throw ConfigError("partition groups cover " +
                      std::to_string(partition.total_clients()) + " clients but N=" +
                      std::to_string(num_clients));
  }
  if (clusters < 1 || num_clients % clusters != 0) {
    throw ConfigError("cluster count M=" + std::to_string(clusters) +
                      " must divide N=" + std::to_string(num_clients) +
                      " for equally sized clusters");
  }
  const Index shard_size = data.total_samples() / num_clients;
  if (shard_size < hp.batch_size) {
    throw ConfigError("shard size " + std::to_string(shard_size) +
                      " is below batch_size " + std::to_string(hp.batch_size));
  }
  if (methods.empty()) throw ConfigError("no methods selected");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      if (methods[i] == methods[j]) throw ConfigError("duplicate method in config");
    }
  }
  if (repeats < 1) throw ConfigError("repeats must be positive");
  if (eval_samples_per_class < 1) throw ConfigError("eval_samples_per_class must be positive");
  if (checkpoint_interval < 0) throw ConfigError("checkpoint_interval must be nonnegative");
  if (smooth_window < 1) throw ConfigError("smooth_window must be positive");
  if (f_star_iterations < 1) throw ConfigError("f_star_iterations must be positive");
  if (smoothness_probes < 1) throw ConfigError("smoothness_probes must be positive");
  if (topology.kind == TopologyKind::kCustom && topology.file.empty()) {
    throw ConfigError("custom topology requires a file");
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

TopologyGraph build_topology(const TopologyConfig& config, int num_clusters) {
  TopologyGraph graph = config.kind == TopologyKind::kCustom
                            ? load_topology_file(config.file)
                            : builtin_topology(config.kind, config.size);
  graph.route_via_cloud = config.route_via_cloud;
  if (graph.cluster_edge.empty()) attach_clusters(graph, num_clusters);
  if (static_cast<int>(graph.cluster_edge.size()) < num_clusters) {
    throw TopologyError("topology attaches " + std::to_string(graph.cluster_edge.size()) +
                        " clusters, need " + std::to_string(num_clusters));
  }
  graph.validate();
  return graph;
}

namespace {

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
  bool used = false;
};

struct EntryTable {
  std::vector<Entry> entries;

  // Single-valued lookup; duplicate keys are an error.
  const Entry* take(const std::string& section, const std::string& key) {
    const Entry* found = nullptr;
    for (Entry& e : entries) {
      if (e.section != section || e.key != key) continue;
      if (found != nullptr) {
        throw ParseError("duplicate key '" + key + "' in [" + section + "]", e.line);
      }
      e.used = true;
      found = &e;
    }
    return found;
  }

  std::vector<const Entry*> take_all(const std::string& section, const std::string& key) {
    std::vector<const Entry*> found;
    for (Entry& e : entries) {
      if (e.section == section && e.key == key) {
        e.used = true;
        found.push_back(&e);
      }
    }
    return found;
  }

  void check_all_used() const {
    for (const Entry& e : entries) {
      if (!e.used) {
        throw ParseError("unknown key '" + e.key + "' in [" + e.section + "]", e.line);
      }
    }
  }
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

EntryTable tokenize(const std::string& text) {
  static const std::vector<std::string> kSections = {"model", "data",     "partition",
                                                     "plan",  "hp",       "topology",
                                                     "run"};
  EntryTable table;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
        throw ParseError("unknown section [" + section + "]", line_no);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected 'key = value'", line_no);
    }
    if (section.empty()) throw ParseError("key outside any section", line_no);
    Entry e;
    e.section = section;
    e.key = trim(line.substr(0, eq));
    e.value = trim(line.substr(eq + 1));
    e.line = line_no;
    if (e.key.empty()) throw ParseError("empty key", line_no);
    table.entries.push_back(e);
  }
  return table;
}

long parse_int(const Entry& e) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected an integer for '" + e.key + "', got '" + e.value + "'",
                     e.line);
  }
}

Real parse_real(const Entry& e) {
  try {
    std::size_t pos = 0;
    const Real v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected a number for '" + e.key + "', got '" + e.value + "'", e.line);
  }
}

bool parse_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ParseError("expected a boolean for '" + e.key + "', got '" + e.value + "'", e.line);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream is(value);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

void read_model(EntryTable& table, ModelSpec& model) {
  if (const Entry* e = table.take("model", "kind")) {
    if (e->value == "linear-softmax") {
      model.kind = ModelKind::kLinearSoftmax;
    } else if (e->value == "mlp") {
      model.kind = ModelKind::kMlp;
    } else {
      throw ParseError("model kind must be linear-softmax or mlp", e->line);
    }
  }
  if (const Entry* e = table.take("model", "input_dim")) {
    model.input_dim = static_cast<Index>(parse_int(*e));
  }
  if (const Entry* e = table.take("model", "num_classes")) {
    model.num_classes = static_cast<Index>(parse_int(*e));
  }
  if (const Entry* e = table.take("model", "hidden_dims")) {
    model.hidden_dims.clear();
    for (const std::string& item : split_list(e->value)) {
      Entry fake{e->section, e->key, item, e->line, true};
      model.hidden_dims.push_back(static_cast<Index>(parse_int(fake)));
    }
  }
}

void read_partition(EntryTable& table, ExperimentConfig& config) {
  if (const Entry* e = table.take("partition", "clients")) {
    config.num_clients = static_cast<int>(parse_int(*e));
  }
  const Entry* name_entry = table.take("partition", "name");
  const std::vector<const Entry*> group_entries = table.take_all("partition", "group");

  PartitionName name = PartitionName::kIid;
  if (name_entry != nullptr) {
    if (name_entry->value == "IID") {
      name = PartitionName::kIid;
    } else if (name_entry->value == "NIID_A") {
      name = PartitionName::kNiidA;
    } else if (name_entry->value == "NIID_B") {
      name = PartitionName::kNiidB;
    } else if (name_entry->value == "custom") {
      name = PartitionName::kCustom;
    } else {
      throw ParseError("partition name must be IID, NIID_A, NIID_B or custom",
                       name_entry->line);
    }
  }

  if (name == PartitionName::kCustom) {
    if (group_entries.empty()) {
      throw ParseError("custom partition needs at least one 'group' line",
                       name_entry != nullptr ? name_entry->line : 0);
    }
    config.partition.name = name;
    config.partition.groups.clear();
    for (const Entry* e : group_entries) {
      // group = <count> iid | <count> noniid <x> <num_major>
      std::istringstream gs(e->value);
      ClientGroup g;
      std::string setting;
      if (!(gs >> g.count >> setting)) {
        throw ParseError("group needs '<count> iid' or '<count> noniid <x> <num_major>'",
                         e->line);
      }
      if (setting == "iid") {
        g.setting = GroupSetting::kIid;
      } else if (setting == "noniid") {
        g.setting = GroupSetting::kXPctNonIid;
        if (!(gs >> g.x >> g.num_major)) {
          throw ParseError("noniid group needs '<count> noniid <x> <num_major>'", e->line);
        }
      } else {
        throw ParseError("group setting must be iid or noniid", e->line);
      }
      std::string extra;
      if (gs >> extra) throw ParseError("trailing tokens in group line", e->line);
      config.partition.groups.push_back(g);
    }
  } else {
    if (!group_entries.empty()) {
      throw ParseError("named partitions take no group lines (use name = custom)",
                       group_entries.front()->line);
    }
    try {
      config.partition = PartitionConfig::preset(name, config.num_clients);
    } catch (const ConfigError& err) {
      throw ParseError(err.what(), name_entry != nullptr ? name_entry->line : 0);
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  EntryTable table = tokenize(text);
  ExperimentConfig config;

  read_model(table, config.model);
  // The dataset mirrors the model's geometry; only its sampling knobs are
  // configurable.
  if (const Entry* e = table.take("data", "samples_per_class")) {
    config.data.samples_per_class = static_cast<Index>(parse_int(*e));
  }
  if (const Entry* e = table.take("data", "class_separation")) {
    config.data.class_separation = parse_real(*e);
  }
  if (const Entry* e = table.take("data", "noise_std")) {
    config.data.noise_std = parse_real(*e);
  }
  config.data.input_dim = config.model.input_dim;
  config.data.num_classes = config.model.num_classes;

  read_partition(table, config);

  if (const Entry* e = table.take("plan", "M")) {
    config.clusters = static_cast<int>(parse_int(*e));
  }
  if (const Entry* e = table.take("plan", "first_cluster")) {
    config.first_cluster = static_cast<int>(parse_int(*e));
  }

  if (const Entry* e = table.take("hp", "eta")) config.hp.eta = parse_real(*e);
  if (const Entry* e = table.take("hp", "K")) config.hp.K = static_cast<int>(parse_int(*e));
  if (const Entry* e = table.take("hp", "T")) config.hp.T = static_cast<int>(parse_int(*e));
  if (const Entry* e = table.take("hp", "batch_size")) {
    config.hp.batch_size = static_cast<Index>(parse_int(*e));
  }
  if (const Entry* e = table.take("hp", "seed")) {
    config.hp.seed = static_cast<std::uint64_t>(parse_int(*e));
  }
  if (const Entry* e = table.take("hp", "parallel_clients")) {
    config.hp.parallel_clients = parse_bool(*e);
  }
  if (const Entry* e = table.take("hp", "epoch_mode")) {
    config.hp.epoch_mode = parse_bool(*e);
  }

  if (const Entry* e = table.take("topology", "kind")) {
    if (e->value == "simple") {
      config.topology.kind = TopologyKind::kSimple;
    } else if (e->value == "breadth_parallel") {
      config.topology.kind = TopologyKind::kBreadthParallel;
    } else if (e->value == "depth_linear") {
      config.topology.kind = TopologyKind::kDepthLinear;
    } else if (e->value == "hybrid") {
      config.topology.kind = TopologyKind::kHybrid;
    } else if (e->value == "custom") {
      config.topology.kind = TopologyKind::kCustom;
    } else {
      throw ParseError("unknown topology kind '" + e->value + "'", e->line);
    }
  }
  if (const Entry* e = table.take("topology", "edges")) {
    config.topology.size.edges = static_cast<int>(parse_int(*e));
  }
  if (const Entry* e = table.take("topology", "breadth")) {
    config.topology.size.breadth = static_cast<int>(parse_int(*e));
  }
  if (const Entry* e = table.take("topology", "depth")) {
    config.topology.size.depth = static_cast<int>(parse_int(*e));
  }
  if (const Entry* e = table.take("topology", "file")) config.topology.file = e->value;
  if (const Entry* e = table.take("topology", "route_via_cloud")) {
    config.topology.route_via_cloud = parse_bool(*e);
  }
  if (const Entry* e = table.take("topology", "include_downloads")) {
    config.topology.include_downloads = parse_bool(*e);
  }

  if (const Entry* e = table.take("run", "methods")) {
    config.methods.clear();
    for (const std::string& item : split_list(e->value)) {
      if (item == "fedavg") {
        config.methods.push_back(Method::kFedAvg);
      } else if (item == "edgeflow_rand") {
        config.methods.push_back(Method::kEdgeFlowRand);
      } else if (item == "edgeflow_seq") {
        config.methods.push_back(Method::kEdgeFlowSeq);
      } else {
        throw ParseError("unknown method '" + item + "'", e->line);
      }
    }
  }
  if (const Entry* e = table.take("run", "output_dir")) config.output_dir = e->value;
  if (const Entry* e = table.take("run", "repeats")) {
    config.repeats = static_cast<int>(parse_int(*e));
  }
  if (const Entry* e = table.take("run", "eval_samples_per_class")) {
    config.eval_samples_per_class = static_cast<Index>(parse_int(*e));
  }
  if (const Entry* e = table.take("run", "checkpoint_interval")) {
    config.checkpoint_interval = static_cast<int>(parse_int(*e));
  }
  if (const Entry* e = table.take("run", "export_shards")) {
    config.export_shards = parse_bool(*e);
  }
  if (const Entry* e = table.take("run", "smooth")) config.smooth_curves = parse_bool(*e);
  if (const Entry* e = table.take("run", "smooth_window")) {
    config.smooth_window = static_cast<int>(parse_int(*e));
  }
  if (const Entry* e = table.take("run", "f_star_iterations")) {
    config.f_star_iterations = static_cast<int>(parse_int(*e));
  }
  if (const Entry* e = table.take("run", "smoothness_probes")) {
    config.smoothness_probes = static_cast<int>(parse_int(*e));
  }

  table.check_all_used();
  config.validate();
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

}  // namespace edgeflow
