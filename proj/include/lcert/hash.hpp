#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lcert {

/// Incremental FNV-1a 64-bit hash. Used for content digests of artifacts
/// and for deriving per-stage seeds from a master seed. Not cryptographic;
/// collisions are irrelevant at the scale of a run manifest.
class Fnv1a {
 public:
  Fnv1a& update(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& update(std::string_view s) { return update(s.data(), s.size()); }
  Fnv1a& update_u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    return update(b, 8);
  }
  Fnv1a& update_f64(double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    __builtin_memcpy(&bits, &v, 8);
    return update_u64(bits);
  }
  template <typename T>
  Fnv1a& update_vec(const std::vector<T>& v) {
    update_u64(v.size());
    if constexpr (std::is_same_v<T, double>) {
      for (double x : v) update_f64(x);
    } else {
      for (const T& x : v) update_u64(static_cast<std::uint64_t>(x));
    }
    return *this;
  }

  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  return Fnv1a().update(data, len).digest();
}

inline std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(s.data(), s.size());
}

std::string hex_digest(std::uint64_t h);

/// splitmix64 finalizer; decorrelates structured inputs before keying RNGs.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic fan-out of a master seed into independent per-stage seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  return mix64(master ^ fnv1a64(label));
}

}  // namespace lcert
