#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace stablemil {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// Seed of a named substream ("datagen", "split", "gmm", "svm-cv",
/// "threshold-split", ...) derived from a root seed. Streams with different
/// names are decorrelated, so adding a new consumer never reshuffles an
/// existing one.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name);
std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index);

inline Rng make_rng(std::uint64_t root, std::string_view name) { return Rng(substream_seed(root, name)); }

/// Uniform double in [0, 1) built from the top 53 bits; unlike
/// std::uniform_real_distribution it is identical across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal draw (Marsaglia polar method), library-independent.
double standard_normal(Rng& rng);

/// Uniform integer in [0, n), rejection sampled.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

template <typename It>
void seeded_shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::swap(first[i - 1], first[j]);
  }
}

}  // namespace stablemil
