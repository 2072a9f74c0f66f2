#pragma once

#include <array>
#include <cstdint>

namespace lcert {

/// Philox4x64-10 counter-based block generator. Stateless: the j-th block of
/// a (seed, stream) pair is a pure function of its counter, so Monte Carlo
/// draws can be evaluated in any order, serially or in parallel, and still
/// produce identical streams.
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        const std::array<std::uint64_t, 2>& key);

/// One logical random substream, addressed by (seed, stream). Values are
/// indexed, not consumed: uniform(i) and gaussian(i) depend only on the
/// constructor arguments and i.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  /// i-th raw 64-bit word of the stream.
  std::uint64_t bits(std::uint64_t i) const;

  /// i-th uniform double in (0,1).
  double uniform(std::uint64_t i) const;

  /// i-th standard normal deviate (Box-Muller over counter-indexed uniforms).
  double gaussian(std::uint64_t i) const;

  /// Uniform integer in [0, bound) via 128-bit multiply (Lemire reduction).
  std::uint64_t uniform_int(std::uint64_t i, std::uint64_t bound) const;

 private:
  std::array<std::uint64_t, 2> key_;
};

}  // namespace lcert
