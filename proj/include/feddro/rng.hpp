#pragma once

#include <cstdint>
#include <random>

namespace feddro {

using RngStream = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-client stream id = hash(master_seed, client_id); streams never alias the
// master stream used for run-level draws.
inline RngStream client_stream(std::uint64_t master_seed, std::uint64_t client_id) {
  return RngStream(splitmix64(splitmix64(master_seed) ^ (client_id + 1)));
}

inline RngStream master_stream(std::uint64_t master_seed) {
  return RngStream(splitmix64(master_seed));
}

}  // namespace feddro
