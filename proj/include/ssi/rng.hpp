#pragma once

#include <cstdint>
#include <random>

#include "ssi/types.hpp"

namespace ssi {

using Seed = std::uint64_t;

/// SplitMix64 finalizer; used only to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of stream `index` under `base`. Streams with different `tag`s never collide in practice.
constexpr Seed derive_seed(Seed base, std::uint64_t index, std::uint64_t tag = 0) noexcept {
  return mix64(mix64(base ^ mix64(tag + 0x5851f42d4c957f2dULL)) + index);
}

using Engine = std::mt19937_64;

inline Vector standard_normal(Engine& eng, Eigen::Index dim) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = dist(eng);
  return v;
}

inline Vector standard_normal(Seed seed, Eigen::Index dim) {
  Engine eng(seed);
  return standard_normal(eng, dim);
}

}  // namespace ssi
