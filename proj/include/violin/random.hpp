#pragma once

#include <cstdint>
#include <random>

#include "violin/linalg.hpp"

namespace violin {

std::uint64_t splitmix64(std::uint64_t x);
// Deterministic child seed for stream `stream` of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// xoshiro256** with splitmix64 seeding; a UniformRandomBitGenerator cheap
// enough to construct once per Monte Carlo rollout.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;
  explicit Xoshiro256(std::uint64_t seed);
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

 private:
  std::uint64_t s_[4];
};

class Rng {
 public:
  using Engine = Xoshiro256;
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return normal_(engine_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
  Vec gaussian(std::size_t d);
  Vec unit_sphere(std::size_t d);
  Vec uniform_ball(std::size_t d, double radius);
  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace violin
