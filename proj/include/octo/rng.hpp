#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace octo {

// All randomness in the library funnels through one root seed, split into
// independent streams per subsystem (sampler, augmentation, degradation,
// protocol generation). Splitting is done by mixing the stream id into the
// seed with splitmix64 so streams never share state.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng split(std::uint64_t root_seed, std::uint64_t stream_id) {
    return Rng(splitmix64(splitmix64(root_seed) ^ stream_id));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased integer in [0, n). Hand-rolled so results do not depend on the
  // standard library's unspecified distribution algorithms.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool next_bool() { return (engine_() & 1u) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Stream ids for the subsystems sharing one root seed.
namespace streams {
inline constexpr std::uint64_t kBatchSampler = 1;
inline constexpr std::uint64_t kAugmentation = 2;
inline constexpr std::uint64_t kDegradation = 3;
inline constexpr std::uint64_t kProtocol = 4;
inline constexpr std::uint64_t kModelInit = 5;
}  // namespace streams

}  // namespace octo
