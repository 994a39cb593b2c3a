#pragma once

#include <cstdint>
#include <random>

namespace grouprl {

/// splitmix64 step; used to derive independent per-sample stream seeds so that
/// results do not depend on worker count or scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0,
                              std::uint64_t d = 0) {
  std::uint64_t s = a;
  std::uint64_t h = splitmix64(s);
  s ^= b + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  s ^= c + 0xa0761d6478bd642fULL;
  h ^= splitmix64(s);
  s ^= d + 0xe7037ed1a0b428dbULL;
  h ^= splitmix64(s);
  return h;
}

inline std::mt19937_64 make_stream(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0,
                                   std::uint64_t d = 0) {
  return std::mt19937_64(mix_seed(a, b, c, d));
}

}  // namespace grouprl
