#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

namespace actsub {

/// Counter-style random stream: the state is fully determined by
/// (seed, stream), so work item j can use stream j and produce the same
/// numbers no matter how evaluation is ordered or parallelized.
///
/// Replay contract (archived seeds depend on it):
///   engine    mt19937_64 seeded via std::seed_seq{seed_lo, seed_hi,
///             stream_lo, stream_hi} (both split into 32-bit halves)
///   uniform01 (x >> 11) * 2^-53 in [0, 1)
///   gaussian  Box-Muller on (1 - u1, u2]; pairs cached per stream
///   integers  rejection sampling, no modulo bias
class RngStream {
 public:
  RngStream(std::int64_t seed, std::uint64_t stream) {
    const auto s = static_cast<std::uint64_t>(seed);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [-1, 1).
  double uniform_symmetric() { return 2.0 * uniform01() - 1.0; }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Fixed stream offsets keeping unrelated consumers of one user seed apart.
namespace stream_id {
inline constexpr std::uint64_t kPoints = 0;            // + sample index
inline constexpr std::uint64_t kBootstrap = 1u << 20;  // + replicate index
inline constexpr std::uint64_t kOrthogonalBasis = 1u << 30;
}  // namespace stream_id

}  // namespace actsub
