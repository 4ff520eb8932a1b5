#pragma once

#include <cstdint>
#include <random>

#include "fvpopt/space.hpp"

namespace fvpopt {

/// Random engine used throughout. Callers own it; library objects never hold one.
using Rng = std::mt19937_64;

/// SplitMix64 output function applied to `state` after advancing it by the
/// golden-ratio increment.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of stream `index` derived from `base_seed`: the (index+1)-th output of
/// a SplitMix64 generator whose state starts at `base_seed`.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

/// Vector of i.i.d. N(0, scale^2) coordinates.
Vector gaussian_vector(std::size_t dim, double scale, Rng& rng);

}  // namespace fvpopt
