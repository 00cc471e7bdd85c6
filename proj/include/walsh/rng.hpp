#pragma once

#include <cmath>
#include <cstdint>

namespace walsh {

namespace rng_detail {
inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace rng_detail

// Counter-based generator (SplitMix64 family). The state is a pure function
// of (seed, stream, counter), so per-path streams are order-independent and
// safe to draw from concurrently on distinct Stream objects.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id)
      : base_(rng_detail::mix64(seed ^ rng_detail::mix64(stream_id * rng_detail::kGamma + 1))) {}

  std::uint64_t next_u64() {
    ++counter_;
    return rng_detail::mix64(base_ + counter_ * rng_detail::kGamma);
  }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586477 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace walsh
