#include "lcert/rng.hpp"

#include <cmath>

#include "lcert/hash.hpp"

namespace lcert {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  __uint128_t p = static_cast<__uint128_t>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

inline std::array<std::uint64_t, 4> round_once(const std::array<std::uint64_t, 4>& c,
                                               const std::array<std::uint64_t, 2>& k) {
  std::uint64_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        const std::array<std::uint64_t, 2>& key) {
  std::array<std::uint64_t, 4> c = counter;
  std::array<std::uint64_t, 2> k = key;
  c = round_once(c, k);
  for (int r = 1; r < 10; ++r) {
    k[0] += kWeyl0;
    k[1] += kWeyl1;
    c = round_once(c, k);
  }
  return c;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : key_{mix64(seed), mix64(stream ^ 0x5851f42d4c957f2dULL)} {}

std::uint64_t RandomStream::bits(std::uint64_t i) const {
  std::array<std::uint64_t, 4> block = philox4x64({i >> 2, 0, 0, 0}, key_);
  return block[i & 3];
}

double RandomStream::uniform(std::uint64_t i) const {
  // 53-bit mantissa, offset by half an ulp to stay inside (0,1).
  return (static_cast<double>(bits(i) >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::gaussian(std::uint64_t i) const {
  std::uint64_t pair = i >> 1;
  double u1 = uniform(2 * pair);
  double u2 = uniform(2 * pair + 1);
  double r = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * M_PI * u2;
  return (i & 1) ? r * std::sin(angle) : r * std::cos(angle);
}

std::uint64_t RandomStream::uniform_int(std::uint64_t i, std::uint64_t bound) const {
  __uint128_t wide = static_cast<__uint128_t>(bits(i)) * bound;
  return static_cast<std::uint64_t>(wide >> 64);
}

}  // namespace lcert
