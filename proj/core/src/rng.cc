#include "ostd/rng.h"

#include <bit>

namespace ostd {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::stream(std::uint64_t master_seed, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(master_seed) ^ splitmix64(~index)));
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  const int shift = std::countl_zero(bound - 1);
  for (;;) {
    const std::uint64_t x = shift == 64 ? 0 : next_u64() >> shift;
    if (x < bound) return x;
  }
}

}  // namespace ostd
