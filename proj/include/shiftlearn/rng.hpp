#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace shiftlearn {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Purpose tags keep independent random streams apart for the same seed.
enum class RngPurpose : std::uint64_t {
  kStreamLabels = 1,
  kStreamNoise = 2,
  kFoldSplit = 3,
  kLearnerInit = 4,
  kLearnerShuffle = 5,
  kTest = 99,
};

/// Counter-based generator: the i-th draw is mix64(key + (i+1) * golden)
/// with key derived from (seed, purpose, t). Any (seed, purpose, t) triple
/// is reproducible on any platform without carrying generator state around.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, RngPurpose purpose, std::uint64_t t);

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// FNV-1a over raw bytes; used for state digests.
class Fnv1a {
 public:
  void add_bytes(std::span<const std::byte> bytes);
  void add(std::uint64_t v);
  void add(double v);
  void add(std::span<const double> v);
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace shiftlearn
