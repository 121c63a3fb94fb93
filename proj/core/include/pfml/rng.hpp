#pragma once

#include <array>
#include <cstdint>

namespace pfml {

/// Philox4x32-10 block function (Salmon et al., Random123). Exposed for
/// known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream. The sequence is a pure function of
/// (seed, stream id) so a frozen particle system can be described by those two
/// numbers. Distinct stream ids give independent sequences. Normal variates
/// use Box-Muller, not <random>'s implementation-defined distributions.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  /// Derives an independent child stream (same seed, hashed stream id).
  RngStream split(std::uint64_t index) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> block_{};
  int block_pos_ = 2;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pfml
