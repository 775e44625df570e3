#pragma once

#include <cstdint>
#include <random>

namespace mvspec {

using Rng = std::mt19937_64;

/// Independent stream `stream` derived from a base seed. Chains and
/// replicates each own one stream; the same (seed, stream) pair always
/// reproduces the same sequence.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6d76u};
  return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double std_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

}  // namespace mvspec
