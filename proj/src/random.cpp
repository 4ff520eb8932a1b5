#include "fvpopt/random.hpp"

namespace fvpopt {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  // Jump straight to the requested output; SplitMix64's state is a counter.
  std::uint64_t state = base_seed + index * 0x9E3779B97F4A7C15ULL;
  return splitmix64(state);
}

Vector gaussian_vector(std::size_t dim, double scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * normal(rng);
  return v;
}

}  // namespace fvpopt
