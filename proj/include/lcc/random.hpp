#pragma once

// Reproducible Gaussian target matrices.
//
// Generator: std::mt19937_64 (its output sequence is fixed by the standard).
// Uniforms: u = ((x >> 11) + 1) * 2^-53, in (0, 1].
// Normal transform: Box-Muller, both outputs used in order,
//   z0 = sqrt(-2 ln u1) cos(2 pi u2), z1 = sqrt(-2 ln u1) sin(2 pi u2).
// Entries are filled row-major.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "lcc/core.hpp"

namespace lcc {

/// splitmix64 finalizer; derives independent per-trial seeds from one seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  return mix_seed(seed ^ mix_seed(trial));
}

class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform() { return std::ldexp(static_cast<double>((engine_() >> 11) + 1), -53); }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline TargetMatrix gen_gaussian_matrix(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (n == 0 || k == 0) throw Error(ErrorKind::invalid_dimension, "need n, k >= 1");
  GaussianSource g(seed);
  std::vector<double> entries(n * k);
  for (double& x : entries) x = g();
  return TargetMatrix(n, k, std::move(entries));
}

}  // namespace lcc
