#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>

#include "fvpopt/random.hpp"
#include "fvpopt/space.hpp"

namespace fvpopt::testing {

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

/// Random test points at mixed scales, matching the sampling used by the checkers.
class PointGenerator {
 public:
  PointGenerator(std::size_t dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}

  Vector next() {
    static constexpr std::array<double, 3> kScales{0.1, 1.0, 10.0};
    return gaussian_vector(dim_, kScales[count_++ % kScales.size()], rng_);
  }

  Rng& rng() { return rng_; }

 private:
  std::size_t dim_;
  Rng rng_;
  std::size_t count_ = 0;
};

}  // namespace fvpopt::testing
