#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lgl {

/// Purposes of the independent random streams derived from one master seed.
enum class Stream : std::uint64_t {
  Graph = 1,
  Noise = 2,
  Trajectory = 3,
  TieBreak = 4,
  Fixture = 5,
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Seed for the stream (master, purpose, indices...). Streams for distinct
/// index tuples are decorrelated, so results do not depend on the order in
/// which cells of an experiment grid are evaluated.
inline std::uint64_t derive_seed(std::uint64_t master, Stream purpose,
                                 std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t h = detail::splitmix64(master ^ 0x6C67C0DEULL);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  for (auto i : indices) h = detail::splitmix64(h ^ (i + 0x51ED27ULL));
  return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, Stream purpose,
                    std::initializer_list<std::uint64_t> indices = {}) {
  return Rng(derive_seed(master, purpose, indices));
}

}  // namespace lgl
