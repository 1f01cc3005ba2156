#pragma once

#include <cstdint>
#include <random>

namespace gfobf {

// splitmix64; used to derive independent stream seeds so parallel workers
// and repeated plans stay deterministic under one root seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return splitmix64(splitmix64(root) ^ stream);
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::uint64_t stream = 0) {
  return std::mt19937_64(derive_seed(root, stream));
}

}  // namespace gfobf
