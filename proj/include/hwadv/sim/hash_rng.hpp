#pragma once

#include <cstdint>

namespace hwadv::sim {

// Counter-based randomness: every in-simulation draw is a pure function of
// (seed, step, vehicle, tag), so replaying a recorded action stream
// reproduces the world bitwise and episodes can run on any worker.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_u64(std::uint64_t a) { return splitmix64(a); }

constexpr std::uint64_t hash_u64(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ b);
}

template <typename... Rest>
constexpr std::uint64_t hash_u64(std::uint64_t a, std::uint64_t b, Rest... rest) {
  return hash_u64(hash_u64(a, b), static_cast<std::uint64_t>(rest)...);
}

/// Uniform draw in [0, 1) keyed by the argument tuple.
template <typename... Keys>
constexpr double unit_draw(std::uint64_t seed, Keys... keys) {
  return static_cast<double>(hash_u64(seed, static_cast<std::uint64_t>(keys)...) >> 11) *
         0x1.0p-53;
}

// Draw tags; keep values stable, they are part of the reproducibility contract.
enum DrawTag : std::uint64_t {
  kDrawEnvLaneChange = 1,
  kDrawEnvDirection = 2,
  kDrawRespawnSide = 3,
  kDrawRespawnLane = 4,
  kDrawRespawnDist = 5,
  kDrawRespawnSpeed = 6,
};

/// Derives the seed of one episode from a run seed.
constexpr std::uint64_t episode_seed(std::uint64_t run_seed, std::uint64_t episode_index) {
  return hash_u64(run_seed, 0x45504953ULL, episode_index);
}

} // namespace hwadv::sim
