#include "edgeflow/data.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <ostream>
#include <string>

namespace edgeflow {

void DatasetSpec::validate() const {
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (input_dim < 1) throw ConfigError("input_dim must be positive");
  if (samples_per_class < 1) throw ConfigError("samples_per_class must be positive");
  if (!(class_separation > 0)) throw ConfigError("class_separation must be > 0");
  if (!(noise_std > 0)) throw ConfigError("noise_std must be > 0");
}

int PartitionConfig::total_clients() const {
  int n = 0;
  for (const ClientGroup& g : groups) n += g.count;
  return n;
}

void PartitionConfig::validate() const {
  if (groups.empty()) throw ConfigError("partition has no client groups");
  for (const ClientGroup& g : groups) {
    if (g.count < 1) throw ConfigError("client group count must be positive");
    if (g.setting == GroupSetting::kXPctNonIid) {
      if (!(g.x > 0 && g.x <= 100)) {
        throw ConfigError("non-IID percentage must lie in (0, 100], got " +
                          std::to_string(g.x));
      }
      if (g.num_major != 1 && g.num_major != 2) {
        throw ConfigError("num_major must be 1 or 2");
      }
    }
  }
}

PartitionConfig PartitionConfig::preset(PartitionName name, int num_clients) {
  if (name == PartitionName::kCustom) {
    throw ConfigError("custom partition requires explicit groups");
  }
  if (num_clients < 10 || num_clients % 10 != 0) {
    throw ConfigError("named partitions scale from N=100 proportions; N=" +
                      std::to_string(num_clients) + " is not a multiple of 10");
  }
  const int unit = num_clients / 10;
  PartitionConfig config;
  config.name = name;
  switch (name) {
    case PartitionName::kIid:
      config.groups = {{10 * unit, GroupSetting::kIid, 100.0, 1}};
      break;
    case PartitionName::kNiidA:
      config.groups = {{1 * unit, GroupSetting::kIid, 100.0, 1},
                       {2 * unit, GroupSetting::kXPctNonIid, 95.0, 2},
                       {7 * unit, GroupSetting::kXPctNonIid, 98.0, 2}};
      break;
    case PartitionName::kNiidB:
      config.groups = {{1 * unit, GroupSetting::kIid, 100.0, 1},
                       {9 * unit, GroupSetting::kXPctNonIid, 100.0, 1}};
      break;
    default:
      throw ConfigError("unknown partition preset");
  }
  return config;
}

const char* partition_name_str(PartitionName name) {
  switch (name) {
    case PartitionName::kIid: return "IID";
    case PartitionName::kNiidA: return "NIID_A";
    case PartitionName::kNiidB: return "NIID_B";
    case PartitionName::kCustom: return "custom";
  }
  return "?";
}

Dataset make_synthetic_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  spec.validate();
  SplitRng root(seed);

  // Unit directions for the class centers: orthonormal axes when the space
  // is wide enough, otherwise random directions on the sphere.
  Matrix centers = Matrix::Zero(spec.num_classes, spec.input_dim);
  if (spec.input_dim >= spec.num_classes) {
    for (Index c = 0; c < spec.num_classes; ++c) centers(c, c) = 1.0;
  } else {
    SplitRng dir_rng = root.split(stream::kData, 1);
    for (Index c = 0; c < spec.num_classes; ++c) {
      Vector u(spec.input_dim);
      do {
        for (Index j = 0; j < spec.input_dim; ++j) u[j] = dir_rng.normal();
      } while (u.norm() < 1e-12);
      centers.row(c) = u.transpose() / u.norm();
    }
  }
  centers *= spec.class_separation;

  Dataset data;
  data.num_classes = spec.num_classes;
  data.features.resize(spec.total_samples(), spec.input_dim);
  data.labels.resize(spec.total_samples());
  Index row = 0;
  for (Index c = 0; c < spec.num_classes; ++c) {
    SplitRng noise_rng = root.split(stream::kData, 2, static_cast<std::uint64_t>(c));
    for (Index s = 0; s < spec.samples_per_class; ++s, ++row) {
      for (Index j = 0; j < spec.input_dim; ++j) {
        data.features(row, j) = centers(c, j) + spec.noise_std * noise_rng.normal();
      }
      data.labels[row] = static_cast<int>(c);
    }
  }
  return data;
}

namespace {

struct ClassPool {
  std::vector<Index> order;  // shuffled sample indices for one class
  std::size_t cursor = 0;

  std::size_t remaining() const { return order.size() - cursor; }
  Index take() { return order[cursor++]; }
};

struct ClientAlloc {
  int client_id = 0;
  GroupSetting setting = GroupSetting::kIid;
  Real x = 100.0;
  int num_major = 1;
  int group_local = 0;  // index within the client's group

  std::vector<int> majors;        // major classes, empty for IID
  std::vector<Index> sample_ids;  // reserved + filled rows of the dataset
};

// Shared allocator behind all partition operations. Works in two passes:
// reserve exact per-class quotas for every client first (stratified quotas
// for IID clients, major-class quotas for non-IID ones), then fill the
// non-major remainder of each non-IID shard uniformly at random without
// replacement from the other classes.
std::vector<ClientShard> allocate_shards(const Dataset& dataset,
                                         const std::vector<ClientGroup>& groups,
                                         std::uint64_t seed) {
  const int num_classes = static_cast<int>(dataset.num_classes);
  int num_clients = 0;
  for (const ClientGroup& g : groups) num_clients += g.count;
  if (num_clients < 1) throw ConfigError("partition needs at least one client");
  if (dataset.size() < num_clients) {
    throw ConfigError("client count " + std::to_string(num_clients) +
                      " exceeds dataset size " + std::to_string(dataset.size()));
  }

  const Index shard_size = dataset.size() / num_clients;
  const Index dropped = dataset.size() - shard_size * num_clients;
  if (dropped > 0) {
    std::cerr << "partition: dropping " << dropped
              << " remainder samples to keep shard sizes equal\n";
  }

  SplitRng root(seed);
  std::vector<ClassPool> pools(static_cast<std::size_t>(num_classes));
  for (Index i = 0; i < dataset.size(); ++i) {
    pools[static_cast<std::size_t>(dataset.labels[i])].order.push_back(i);
  }
  for (int c = 0; c < num_classes; ++c) {
    SplitRng pool_rng = root.split(stream::kPartition, 1, static_cast<std::uint64_t>(c));
    pool_rng.shuffle(pools[static_cast<std::size_t>(c)].order);
  }

  std::vector<ClientAlloc> clients;
  clients.reserve(static_cast<std::size_t>(num_clients));
  {
    int id = 0;
    for (const ClientGroup& g : groups) {
      for (int j = 0; j < g.count; ++j, ++id) {
        ClientAlloc a;
        a.client_id = id;
        a.setting = g.setting;
        a.x = g.x;
        a.num_major = g.num_major;
        a.group_local = j;
        clients.push_back(a);
      }
    }
  }

  // Reservation pass.
  for (ClientAlloc& a : clients) {
    if (a.setting == GroupSetting::kIid) {
      const Index base = shard_size / num_classes;
      const Index rem = shard_size % num_classes;
      for (int c = 0; c < num_classes; ++c) {
        Index quota = base;
        // Spread the per-shard remainder across classes, rotating by client
        // so no class is systematically favored.
        for (Index r = 0; r < rem; ++r) {
          if ((a.client_id + r) % num_classes == c) ++quota;
        }
        ClassPool& pool = pools[static_cast<std::size_t>(c)];
        if (pool.remaining() < static_cast<std::size_t>(quota)) {
          throw CapacityError("insufficient samples in class " + std::to_string(c) +
                                  " while stratifying client " +
                                  std::to_string(a.client_id),
                              c);
        }
        for (Index q = 0; q < quota; ++q) a.sample_ids.push_back(pool.take());
      }
    } else {
      const Index total_major = static_cast<Index>(
          std::llround(a.x / 100.0 * static_cast<Real>(shard_size)));
      const Index per_major = total_major / a.num_major;
      for (int i = 0; i < a.num_major; ++i) {
        a.majors.push_back((a.num_major * a.group_local + i) % num_classes);
      }
      for (int i = 0; i < a.num_major; ++i) {
        const int c = a.majors[static_cast<std::size_t>(i)];
        Index quota = per_major;
        if (i == 0) quota += total_major % a.num_major;
        ClassPool& pool = pools[static_cast<std::size_t>(c)];
        if (pool.remaining() < static_cast<std::size_t>(quota)) {
          throw CapacityError("insufficient samples in major class " + std::to_string(c) +
                                  " for client " + std::to_string(a.client_id) + " (need " +
                                  std::to_string(quota) + ", have " +
                                  std::to_string(pool.remaining()) + ")",
                              c);
        }
        for (Index q = 0; q < quota; ++q) a.sample_ids.push_back(pool.take());
      }
    }
  }

  // Fill pass: non-IID shards top up from the other classes, uniformly over
  // whatever remains. Pools are pre-shuffled, so popping the next entry of a
  // weighted-chosen class is a uniform draw without replacement. Fills are
  // tracked apart from the reserved quotas so a blocked client can trade
  // with an earlier fill.
  const auto is_major = [&](const ClientAlloc& a, int cls) {
    return std::find(a.majors.begin(), a.majors.end(), cls) != a.majors.end();
  };
  std::vector<std::vector<Index>> fills(clients.size());
  for (std::size_t ci = 0; ci < clients.size(); ++ci) {
    ClientAlloc& a = clients[ci];
    if (a.setting == GroupSetting::kIid) continue;
    const Index need = shard_size - static_cast<Index>(a.sample_ids.size());
    SplitRng fill_rng =
        root.split(stream::kPartition, 2, static_cast<std::uint64_t>(a.client_id));
    for (Index q = 0; q < need; ++q) {
      std::size_t total_left = 0;
      for (int c = 0; c < num_classes; ++c) {
        if (is_major(a, c)) continue;
        total_left += pools[static_cast<std::size_t>(c)].remaining();
      }
      if (total_left == 0) {
        // Whatever remains sits in this client's own major classes. Trade
        // with an earlier client: hand over one of its non-major fills and
        // let it absorb a leftover it is allowed to hold.
        bool repaired = false;
        for (std::size_t di = 0; di < clients.size() && !repaired; ++di) {
          if (di == ci) continue;
          const ClientAlloc& donor = clients[di];
          int leftover_class = -1;
          for (int c = 0; c < num_classes && leftover_class < 0; ++c) {
            if (pools[static_cast<std::size_t>(c)].remaining() > 0 && !is_major(donor, c)) {
              leftover_class = c;
            }
          }
          if (leftover_class < 0) continue;
          for (std::size_t s = 0; s < fills[di].size(); ++s) {
            const int cls = dataset.labels[fills[di][s]];
            if (is_major(a, cls)) continue;
            fills[static_cast<std::size_t>(ci)].push_back(fills[di][s]);
            fills[di][s] = pools[static_cast<std::size_t>(leftover_class)].take();
            repaired = true;
            break;
          }
        }
        if (!repaired) {
          throw SamplingError("no non-major samples left while filling client " +
                              std::to_string(a.client_id));
        }
        continue;
      }
      std::uint64_t r = fill_rng.below(total_left);
      for (int c = 0; c < num_classes; ++c) {
        if (is_major(a, c)) continue;
        ClassPool& pool = pools[static_cast<std::size_t>(c)];
        if (r < pool.remaining()) {
          fills[static_cast<std::size_t>(ci)].push_back(pool.take());
          break;
        }
        r -= pool.remaining();
      }
    }
  }
  for (std::size_t ci = 0; ci < clients.size(); ++ci) {
    clients[ci].sample_ids.insert(clients[ci].sample_ids.end(), fills[ci].begin(),
                                  fills[ci].end());
  }

  // Materialize shards.
  std::vector<ClientShard> shards;
  shards.reserve(clients.size());
  for (ClientAlloc& a : clients) {
    SplitRng shuffle_rng =
        root.split(stream::kPartition, 3, static_cast<std::uint64_t>(a.client_id));
    shuffle_rng.shuffle(a.sample_ids);

    ClientShard shard;
    shard.client_id = a.client_id;
    shard.features.resize(static_cast<Index>(a.sample_ids.size()), dataset.features.cols());
    shard.labels.resize(static_cast<Index>(a.sample_ids.size()));
    shard.label_histogram.assign(static_cast<std::size_t>(num_classes), 0);
    for (std::size_t i = 0; i < a.sample_ids.size(); ++i) {
      const Index src = a.sample_ids[i];
      shard.features.row(static_cast<Index>(i)) = dataset.features.row(src);
      shard.labels[static_cast<Index>(i)] = dataset.labels[src];
      ++shard.label_histogram[static_cast<std::size_t>(dataset.labels[src])];
    }
    shards.push_back(std::move(shard));
  }
  return shards;
}

}  // namespace

std::vector<ClientShard> partition_iid(const Dataset& dataset, int num_clients,
                                       std::uint64_t seed) {
  return allocate_shards(dataset, {{num_clients, GroupSetting::kIid, 100.0, 1}}, seed);
}

std::vector<ClientShard> partition_x_pct_noniid(const Dataset& dataset, int num_clients,
                                                Real x, int num_major, std::uint64_t seed) {
  PartitionConfig config;
  config.name = PartitionName::kCustom;
  config.groups = {{num_clients, GroupSetting::kXPctNonIid, x, num_major}};
  config.validate();
  return allocate_shards(dataset, config.groups, seed);
}

std::vector<ClientShard> build_partition(const PartitionConfig& config,
                                         const Dataset& dataset, std::uint64_t seed) {
  config.validate();
  return allocate_shards(dataset, config.groups, seed);
}

void export_shards_csv(std::ostream& os, const std::vector<ClientShard>& shards) {
  if (shards.empty()) return;
  const Index dim = shards.front().features.cols();
  os << "client_id,label";
  for (Index j = 0; j < dim; ++j) os << ",f" << j;
  os << "\n";
  char buf[64];
  for (const ClientShard& shard : shards) {
    for (Index r = 0; r < shard.size(); ++r) {
      os << shard.client_id << "," << shard.labels[r];
      for (Index j = 0; j < dim; ++j) {
        std::snprintf(buf, sizeof(buf), "%.12g", shard.features(r, j));
        os << "," << buf;
      }
      os << "\n";
    }
  }
}

std::vector<int> recompute_histogram(const ClientShard& shard, Index num_classes) {
  std::vector<int> hist(static_cast<std::size_t>(num_classes), 0);
  for (Index r = 0; r < shard.labels.size(); ++r) {
    ++hist[static_cast<std::size_t>(shard.labels[r])];
  }
  return hist;
}

}  // namespace edgeflow
