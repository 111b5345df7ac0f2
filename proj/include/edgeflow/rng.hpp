#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "edgeflow/types.hpp"

namespace edgeflow {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Tags that keep independent consumers of one master seed on disjoint key
// paths. Streams derived with different tags never overlap.
namespace stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kSchedule = 2;
inline constexpr std::uint64_t kClient = 3;
inline constexpr std::uint64_t kSampler = 4;
inline constexpr std::uint64_t kData = 5;
inline constexpr std::uint64_t kPartition = 6;
inline constexpr std::uint64_t kProbe = 7;
inline constexpr std::uint64_t kEval = 8;
}  // namespace stream

// Counter-based splittable generator (splitmix64 core). split() derives a
// child stream keyed by up to three integers; draws from a child do not
// disturb the parent, so results are independent of the order in which
// clients, rounds, or probes consume randomness.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : key_(detail::mix64(seed)), counter_(0) {}

  SplitRng split(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    std::uint64_t k = key_;
    k = detail::mix64(k ^ detail::mix64(a ^ 0x8e9c0d8f3b1a5e77ULL));
    k = detail::mix64(k ^ detail::mix64(b ^ 0x1f83d9abfb41bd6bULL));
    k = detail::mix64(k ^ detail::mix64(c ^ 0x5be0cd19137e2179ULL));
    return SplitRng(k, 0);
  }

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = key_ ^ counter_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  Real uniform() { return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe under log().
  Real uniform_pos() { return static_cast<Real>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  Real uniform_in(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; consumes exactly two raw draws.
  Real normal() {
    const Real u1 = uniform_pos();
    const Real u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Unbiased uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t lim = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= lim);
    return v % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // k distinct indices drawn uniformly from [0, n), returned in ascending
  // order so downstream reductions are independent of draw order.
  std::vector<Index> sample_without_replacement(Index n, Index k);

 private:
  SplitRng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_;
};

inline std::vector<Index> SplitRng::sample_without_replacement(Index n, Index k) {
  if (k > n) {
    throw SamplingError("cannot draw " + std::to_string(k) +
                        " distinct samples from a population of " + std::to_string(n));
  }
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < k; ++i) {
    const Index j = i + static_cast<Index>(below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace edgeflow
