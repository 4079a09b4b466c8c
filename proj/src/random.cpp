#include "violin/random.hpp"

#include <bit>
#include <cmath>

namespace violin {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& w : s_) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    w = z ^ (z >> 31);
  }
}

Xoshiro256::result_type Xoshiro256::operator()() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

Vec Rng::gaussian(std::size_t d) {
  Vec v(d);
  for (double& x : v) x = normal();
  return v;
}

Vec Rng::unit_sphere(std::size_t d) {
  for (;;) {
    Vec v = gaussian(d);
    const double n = norm2(v);
    if (n > 1e-300) return scaled(v, 1.0 / n);
  }
}

Vec Rng::uniform_ball(std::size_t d, double radius) {
  Vec v = unit_sphere(d);
  const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(d));
  return scaled(v, r);
}

}  // namespace violin
