#pragma once

// Deterministic randomness: a splitmix64 core with per-(seed, index)
// substreams so that trial k of a run never depends on how many draws
// earlier trials consumed. Normals come from Box-Muller. Streams are
// reproducible for a fixed build; cross-platform identity is not promised
// (libm differences), per the reproducibility contract.

#include <cstdint>
#include <cmath>

namespace maxop {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(state_);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); multiply-shift, bias is negligible at the
  // sample counts used here and determinism is what matters.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double next_normal() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    double u1 = next_double();
    double u2 = next_double();
    while (u1 == 0.0) u1 = next_double();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    cache_ = radius * std::sin(angle);
    have_cache_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  double cache_ = 0.0;
  bool have_cache_ = false;
};

// Independent substream for (seed, index); adjacent indices decorrelate
// through an extra mixing round.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(detail::mix64(seed ^ detail::mix64(index + 0x9E3779B97F4A7C15ULL)));
}

}  // namespace maxop
