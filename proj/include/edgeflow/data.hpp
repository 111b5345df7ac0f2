#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "edgeflow/model.hpp"
#include "edgeflow/types.hpp"

namespace edgeflow {

// Class-conditional Gaussian blobs standing in for an image benchmark.
struct DatasetSpec {
  Index num_classes = 10;
  Index input_dim = 16;
  Index samples_per_class = 1000;
  Real class_separation = 4.0;
  Real noise_std = 1.0;

  Index total_samples() const { return num_classes * samples_per_class; }
  void validate() const;
};

struct Dataset {
  Matrix features;  // rows ordered class-major at generation time
  IntVector labels;
  Index num_classes = 0;

  Index size() const { return features.rows(); }
  Batch as_batch() const { return Batch{features, labels}; }
};

// One client's local data plus its label mix.
struct ClientShard {
  int client_id = -1;
  Matrix features;
  IntVector labels;
  std::vector<int> label_histogram;

  Index size() const { return features.rows(); }
  Batch as_batch() const { return Batch{features, labels}; }
};

enum class GroupSetting { kIid, kXPctNonIid };

struct ClientGroup {
  int count = 0;
  GroupSetting setting = GroupSetting::kIid;
  Real x = 100.0;     // percent of a shard drawn from its major classes
  int num_major = 1;  // 1 or 2
};

enum class PartitionName { kIid, kNiidA, kNiidB, kCustom };

struct PartitionConfig {
  PartitionName name = PartitionName::kIid;
  std::vector<ClientGroup> groups;

  int total_clients() const;
  void validate() const;

  // The three named configurations, scaled from their N=100 proportions.
  static PartitionConfig preset(PartitionName name, int num_clients);
};

const char* partition_name_str(PartitionName name);

Dataset make_synthetic_dataset(const DatasetSpec& spec, std::uint64_t seed);

std::vector<ClientShard> partition_iid(const Dataset& dataset, int num_clients,
                                       std::uint64_t seed);

std::vector<ClientShard> partition_x_pct_noniid(const Dataset& dataset, int num_clients,
                                                Real x, int num_major, std::uint64_t seed);

std::vector<ClientShard> build_partition(const PartitionConfig& config,
                                         const Dataset& dataset, std::uint64_t seed);

// Columnar text export: one header line, then client_id,label,f0..f{d-1}.
void export_shards_csv(std::ostream& os, const std::vector<ClientShard>& shards);

std::vector<int> recompute_histogram(const ClientShard& shard, Index num_classes);

}  // namespace edgeflow
