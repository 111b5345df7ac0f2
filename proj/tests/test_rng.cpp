#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "edgeflow/rng.hpp"

using namespace edgeflow;

TEST_CASE("same seed reproduces the stream") {
  SplitRng a(42);
  SplitRng b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("split streams are independent of parent consumption") {
  SplitRng parent(7);
  SplitRng child_before = parent.split(3, 1);
  for (int i = 0; i < 10; ++i) parent.next_u64();
  SplitRng child_after = parent.split(3, 1);
  for (int i = 0; i < 20; ++i) CHECK(child_before.next_u64() == child_after.next_u64());
}

TEST_CASE("split keys differ across components") {
  SplitRng parent(7);
  CHECK(parent.split(1, 2).next_u64() != parent.split(2, 1).next_u64());
  CHECK(parent.split(1).next_u64() != parent.split(1, 1).next_u64());
}

TEST_CASE("uniform stays in [0,1) and uniform_pos in (0,1]") {
  SplitRng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform_pos();
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("below is in range and roughly uniform") {
  SplitRng rng(13);
  std::vector<int> counts(5, 0);
  const int draws = 50000;
  for (int i = 0; i < draws; ++i) {
    const auto v = rng.below(5);
    REQUIRE(v < 5);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (int c : counts) {
    CHECK(std::abs(c - draws / 5) < draws / 50);  // within 2% of the share
  }
}

TEST_CASE("normal has sane first two moments") {
  SplitRng rng(17);
  const int n = 200000;
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("sample_without_replacement yields sorted distinct indices") {
  SplitRng rng(19);
  const auto sample = rng.sample_without_replacement(100, 30);
  REQUIRE(sample.size() == 30);
  std::set<Index> seen;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    CHECK(sample[i] >= 0);
    CHECK(sample[i] < 100);
    seen.insert(sample[i]);
    if (i > 0) CHECK(sample[i] > sample[i - 1]);
  }
  CHECK(seen.size() == 30);

  const auto all = rng.sample_without_replacement(10, 10);
  for (Index i = 0; i < 10; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);

  CHECK_THROWS_AS(rng.sample_without_replacement(5, 6), SamplingError);
}

TEST_CASE("shuffle permutes") {
  SplitRng rng(23);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  rng.shuffle(v);
  std::set<int> seen(v.begin(), v.end());
  CHECK(seen.size() == 10);
}
