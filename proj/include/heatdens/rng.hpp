#pragma once

#include <cstdint>
#include <random>

namespace heatdens::rng {

using Engine = std::mt19937_64;

// SplitMix64 finalizer; used to derive well-separated stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Engine for stream `stream` of a run seeded with `seed`. Depends only on the
// pair, never on which worker consumes the stream.
inline Engine stream_engine(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(stream)};
  return Engine(seq);
}

// Uniform on the open interval (0, 1) with 53 random bits.
inline double uniform_open(Engine& e) {
  return (static_cast<double>(e() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace heatdens::rng
