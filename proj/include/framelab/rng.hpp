#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace framelab {

/// Engine used for every stochastic draw in the library.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent child seed from a parent seed and a path of
/// stream identifiers, so that e.g. video k of cell j never shares a stream
/// with video k of cell j+1.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(parent);
  for (std::uint64_t p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

// Stream tags.
namespace stream {
inline constexpr std::uint64_t kPrototypes = 1;
inline constexpr std::uint64_t kVideo = 2;
inline constexpr std::uint64_t kRandomPolicy = 3;
inline constexpr std::uint64_t kModelInit = 4;
inline constexpr std::uint64_t kProjection = 5;
inline constexpr std::uint64_t kShuffle = 6;
inline constexpr std::uint64_t kViewNoise = 7;
inline constexpr std::uint64_t kCorpus = 8;
}  // namespace stream

}  // namespace framelab
