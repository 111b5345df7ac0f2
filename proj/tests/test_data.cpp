#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

#include "edgeflow/bounds.hpp"
#include "edgeflow/data.hpp"
#include "edgeflow/engine.hpp"
#include "oracles.hpp"

using namespace edgeflow;

namespace {

// Chi-square critical value, df = 9, significance 0.01.
constexpr double kChiSqCrit9 = 21.666;

DatasetSpec small_spec(Index samples_per_class = 100) {
  DatasetSpec spec;
  spec.num_classes = 10;
  spec.input_dim = 16;
  spec.samples_per_class = samples_per_class;
  spec.class_separation = 4.0;
  spec.noise_std = 1.0;
  return spec;
}

std::vector<std::vector<double>> sorted_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows;
  for (Index r = 0; r < m.rows(); ++r) {
    rows.emplace_back(m.row(r).begin(), m.row(r).end());
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

TEST_CASE("same spec and seed give bit-identical datasets") {
  const DatasetSpec spec = small_spec();
  const Dataset a = make_synthetic_dataset(spec, 7);
  const Dataset b = make_synthetic_dataset(spec, 7);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  const Dataset c = make_synthetic_dataset(spec, 8);
  CHECK(a.features != c.features);
}

TEST_CASE("vanishing noise collapses samples onto class centers") {
  DatasetSpec spec = small_spec(5);
  spec.noise_std = 1e-300;
  const Dataset data = make_synthetic_dataset(spec, 3);
  for (Index r = 0; r < data.size(); ++r) {
    for (Index j = 0; j < spec.input_dim; ++j) {
      const double expected = (j == data.labels[r]) ? spec.class_separation : 0.0;
      CHECK(std::abs(data.features(r, j) - expected) <= 1e-290);
    }
  }
}

TEST_CASE("the synthetic task is learnable by a centralized fit") {
  const DatasetSpec spec = small_spec(100);
  const Dataset data = make_synthetic_dataset(spec, 0);
  ModelSpec model;
  model.input_dim = spec.input_dim;
  model.num_classes = spec.num_classes;
  const CentralizedFit fit = centralized_train(model, data.as_batch(), 300, 0);
  const EvalResult eval = evaluate(model, fit.params, data.as_batch());
  CHECK(eval.accuracy >= 0.95);
}

TEST_CASE("single-client partition carries the whole dataset") {
  const Dataset data = make_synthetic_dataset(small_spec(10), 1);
  const auto shards = partition_iid(data, 1, 5);
  REQUIRE(shards.size() == 1);
  CHECK(shards[0].size() == data.size());
  CHECK(sorted_rows(shards[0].features) == sorted_rows(data.features));
}

TEST_CASE("stratified IID shards have exact sizes and uniform histograms") {
  const Dataset data = make_synthetic_dataset(small_spec(100), 2);  // 1000 samples
  const auto shards = partition_iid(data, 100, 3);
  REQUIRE(shards.size() == 100);
  for (const ClientShard& shard : shards) {
    CHECK(shard.size() == 10);
    for (int count : shard.label_histogram) CHECK(count == 1);
  }
}

TEST_CASE("IID shards pass the chi-square uniformity check") {
  const Dataset data = make_synthetic_dataset(small_spec(200), 4);  // 2000 samples
  const auto shards = partition_iid(data, 20, 11);
  for (const ClientShard& shard : shards) {
    CHECK(oracles::chi_square_uniform(shard.label_histogram) < kChiSqCrit9);
  }
}

TEST_CASE("partition covers the dataset without duplicates") {
  const Dataset data = make_synthetic_dataset(small_spec(30), 6);  // 300 samples
  const auto shards = partition_iid(data, 5, 7);                   // shard 60, drop 0
  Index total = 0;
  std::vector<double> first_coords;
  for (const ClientShard& shard : shards) {
    total += shard.size();
    for (Index r = 0; r < shard.size(); ++r) first_coords.push_back(shard.features(r, 0));
  }
  CHECK(total == 300);
  // 5 shards of 60 across 10 classes: stratification is exact.
  for (const ClientShard& shard : shards) {
    for (int count : shard.label_histogram) CHECK(count == 6);
  }
  std::sort(first_coords.begin(), first_coords.end());
  CHECK(std::adjacent_find(first_coords.begin(), first_coords.end()) == first_coords.end());

  std::vector<double> dataset_coords;
  for (Index r = 0; r < data.size(); ++r) dataset_coords.push_back(data.features(r, 0));
  std::sort(dataset_coords.begin(), dataset_coords.end());
  CHECK(std::includes(dataset_coords.begin(), dataset_coords.end(), first_coords.begin(),
                      first_coords.end()));
}

TEST_CASE("fully non-IID shards hold exactly one class") {
  const Dataset data = make_synthetic_dataset(small_spec(100), 8);
  const auto shards = partition_x_pct_noniid(data, 10, 100.0, 1, 9);
  for (const ClientShard& shard : shards) {
    int nonzero = 0;
    for (int count : shard.label_histogram) nonzero += (count > 0) ? 1 : 0;
    CHECK(nonzero == 1);
  }
}

TEST_CASE("degenerate x matching the global share looks IID") {
  // x = 10% with 10 classes and one major class: the major quota equals the
  // uniform share.
  const Dataset data = make_synthetic_dataset(small_spec(100), 10);
  const auto shards = partition_x_pct_noniid(data, 10, 10.0, 1, 12);
  for (const ClientShard& shard : shards) {
    CHECK(oracles::chi_square_uniform(shard.label_histogram) < kChiSqCrit9);
  }
}

TEST_CASE("two-major quota arithmetic is exact") {
  // Shard size 200: 95% over two majors is 95 + 95, remainder 10 elsewhere.
  const Dataset data = make_synthetic_dataset(small_spec(100), 13);  // 1000 samples
  const auto shards = partition_x_pct_noniid(data, 5, 95.0, 2, 14);
  for (const ClientShard& shard : shards) {
    REQUIRE(shard.size() == 200);
    std::vector<int> hist = shard.label_histogram;
    std::sort(hist.begin(), hist.end());
    CHECK(hist[9] == 95);
    CHECK(hist[8] == 95);
    CHECK(std::accumulate(hist.begin(), hist.begin() + 8, 0) == 10);
  }
}

TEST_CASE("quota slack never exceeds the major count") {
  const Dataset data = make_synthetic_dataset(small_spec(100), 15);
  for (const Real x : {35.0, 61.0, 95.0}) {
    for (const int num_major : {1, 2}) {
      const auto shards = partition_x_pct_noniid(data, 10, x, num_major, 16);
      for (const ClientShard& shard : shards) {
        std::vector<int> hist = shard.label_histogram;
        std::sort(hist.begin(), hist.end(), std::greater<int>());
        int major_mass = 0;
        for (int i = 0; i < num_major; ++i) major_mass += hist[static_cast<std::size_t>(i)];
        const long target = std::lround(x / 100.0 * static_cast<double>(shard.size()));
        CHECK(std::abs(major_mass - target) <= num_major);
      }
    }
  }
}

TEST_CASE("NIID B preset yields ten uniform and ninety single-class shards") {
  const Dataset data = make_synthetic_dataset(small_spec(100), 17);
  const auto config = PartitionConfig::preset(PartitionName::kNiidB, 100);
  const auto shards = build_partition(config, data, 18);
  REQUIRE(shards.size() == 100);
  int uniform = 0, single = 0;
  for (const ClientShard& shard : shards) {
    int nonzero = 0;
    for (int count : shard.label_histogram) nonzero += (count > 0) ? 1 : 0;
    if (nonzero == 1) {
      ++single;
    } else if (oracles::chi_square_uniform(shard.label_histogram) < kChiSqCrit9) {
      ++uniform;
    }
  }
  CHECK(single == 90);
  CHECK(uniform == 10);
}

TEST_CASE("NIID A preset matches its enumerated mixture") {
  // 10k samples, shard 100: the 95/98-percent quotas are integral.
  const Dataset data = make_synthetic_dataset(small_spec(1000), 19);
  const auto config = PartitionConfig::preset(PartitionName::kNiidA, 100);
  const auto shards = build_partition(config, data, 20);
  REQUIRE(shards.size() == 100);
  for (int i = 0; i < 10; ++i) {
    CHECK(oracles::chi_square_uniform(shards[static_cast<std::size_t>(i)].label_histogram) <
          kChiSqCrit9);
  }
  for (int i = 10; i < 30; ++i) {
    std::vector<int> hist = shards[static_cast<std::size_t>(i)].label_histogram;
    std::sort(hist.begin(), hist.end(), std::greater<int>());
    CHECK(hist[0] + hist[1] == 95);
  }
  for (int i = 30; i < 100; ++i) {
    std::vector<int> hist = shards[static_cast<std::size_t>(i)].label_histogram;
    std::sort(hist.begin(), hist.end(), std::greater<int>());
    CHECK(hist[0] + hist[1] == 98);
  }
}

TEST_CASE("partitions are reproducible per seed") {
  const Dataset data = make_synthetic_dataset(small_spec(50), 21);
  PartitionConfig config;
  config.name = PartitionName::kCustom;
  config.groups = {{2, GroupSetting::kIid, 100.0, 1},
                   {8, GroupSetting::kXPctNonIid, 70.0, 2}};
  const auto a = build_partition(config, data, 22);
  const auto b = build_partition(config, data, 22);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].features == b[i].features);
    CHECK(a[i].labels == b[i].labels);
  }
}

TEST_CASE("declared histograms match recomputation") {
  const Dataset data = make_synthetic_dataset(small_spec(40), 23);
  const auto shards = partition_x_pct_noniid(data, 8, 80.0, 2, 24);
  for (const ClientShard& shard : shards) {
    CHECK(shard.label_histogram == recompute_histogram(shard, data.num_classes));
  }
}

TEST_CASE("an overdrawn major class raises a capacity error naming it") {
  DatasetSpec spec;
  spec.num_classes = 2;
  spec.input_dim = 4;
  spec.samples_per_class = 10;
  const Dataset data = make_synthetic_dataset(spec, 25);
  // Three fully skewed clients over two classes: class 0 is major twice and
  // needs 12 of its 10 samples.
  try {
    partition_x_pct_noniid(data, 3, 100.0, 1, 26);
    FAIL("expected CapacityError");
  } catch (const CapacityError& e) {
    CHECK(e.class_id == 0);
    CHECK(std::string(e.what()).find("class 0") != std::string::npos);
  }
}

TEST_CASE("more clients than samples is rejected") {
  DatasetSpec spec;
  spec.num_classes = 2;
  spec.input_dim = 2;
  spec.samples_per_class = 3;
  const Dataset data = make_synthetic_dataset(spec, 27);
  CHECK_THROWS_AS(partition_iid(data, 7, 28), ConfigError);
}

TEST_CASE("shard export carries one row per sample") {
  const Dataset data = make_synthetic_dataset(small_spec(10), 29);
  const auto shards = partition_iid(data, 5, 30);
  std::ostringstream os;
  export_shards_csv(os, shards);
  const std::string text = os.str();
  const auto lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == 1 + data.size());
  CHECK(text.rfind("client_id,label,f0", 0) == 0);
}

TEST_CASE("preset scaling rejects awkward client counts") {
  CHECK_THROWS_AS(PartitionConfig::preset(PartitionName::kNiidA, 55), ConfigError);
  const auto scaled = PartitionConfig::preset(PartitionName::kNiidB, 50);
  CHECK(scaled.total_clients() == 50);
  CHECK(scaled.groups[0].count == 5);
  CHECK(scaled.groups[1].count == 45);
}
