#pragma once

#include <cstdint>
#include <random>

namespace dpolymer {

/// Registry of purpose tags used in seed derivation. The numeric values are
/// part of the reproducibility contract and must never change.
enum class Purpose : std::uint64_t {
  paths = 1,
  environment = 2,
  frequencies = 3,
  coefficients = 4,
  resampling = 5,
};

/// One step of SplitMix64 from state `x`: add the golden gamma, then apply
/// the standard finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child seed for (purpose, index) under `master`:
///   splitmix64(master ^ (tag * 0x9E3779B97F4A7C15 + index))
/// with wrapping 64-bit arithmetic.
constexpr std::uint64_t derive_seed(std::uint64_t master, Purpose purpose,
                                    std::uint64_t index) noexcept {
  const auto tag = static_cast<std::uint64_t>(purpose);
  return splitmix64(master ^ (tag * 0x9E3779B97F4A7C15ULL + index));
}

/// Generator used for every stream in the library.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, Purpose purpose, std::uint64_t index) {
  return Rng(derive_seed(master, purpose, index));
}

}  // namespace dpolymer
