#pragma once

// Portable pseudo random numbers.
//
// Streams are xoshiro256** seeded through splitmix64.  Every derived quantity
// (bounded integers, unit doubles, Gaussians) is computed by the algorithms
// below rather than by <random> distributions, whose output is implementation
// defined.  A port reproducing these steps reproduces every generated instance.
//
//   splitmix64:  z = (s += 0x9e3779b97f4a7c15);
//                z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9;
//                z = (z ^ (z >> 27)) * 0x94d049bb133111eb;
//                return z ^ (z >> 31);
//   seeding:     state[0..3] = four consecutive splitmix64 outputs of the seed
//   derive:      Rng(seed, stream) seeds splitmix64 with
//                seed ^ splitmix64_once(stream + 0x632be59bd9b4e019)
//   uniform():   (next() >> 11) * 2^-53
//   below(b):    Lemire's multiply-shift with rejection on the low word
//   gaussian():  Marsaglia polar method, second variate cached

#include <array>
#include <cstdint>
#include <vector>

namespace discforge {

class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  /// Uniform double in [0, 1).
  double uniform();
  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  double gaussian();
  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);
  /// `m` distinct indices from 0..n-1 (partial Fisher-Yates, in draw order).
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t m);

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace discforge
