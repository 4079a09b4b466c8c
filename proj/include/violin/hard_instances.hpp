#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>

#include "violin/model.hpp"
#include "violin/random.hpp"

namespace violin {

struct SpherePacking {
  std::vector<Vec> points;
  double separation = 0.0;
  std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }
};

// Greedy rejection sampling of unit vectors; stops after max_attempts draws or
// once max_points are accepted.
SpherePacking build_packing(std::size_t d, double separation, std::uint64_t seed, std::size_t max_attempts,
                            std::optional<std::size_t> max_points = std::nullopt);
// Exhaustive pairwise check; returns the minimum pairwise distance found.
double audit_packing(const SpherePacking& packing);
bool packing_is_valid(const SpherePacking& packing);

// One point per line, coordinates separated by spaces, after a header line
// "# packing d=<d> n=<n> separation=<sep>".
void write_packing(std::ostream& os, const SpherePacking& packing);
SpherePacking read_packing(std::istream& is);

// Largest needle width for which needles around a packing of this separation
// are disjoint on the unit ball.
double needle_eps_limit(double separation);
std::vector<ModelParams> relu_needle_family(const SpherePacking& packing, double eps);

class StochasticBasisEnv {
 public:
  StochasticBasisEnv(std::size_t d, std::size_t truth, bool noiseless = false);
  double reward(std::span<const double> a, Rng& rng) const;
  std::size_t dim() const { return d_; }
  std::size_t truth() const { return truth_; }

 private:
  std::size_t d_;
  std::size_t truth_;
  bool noiseless_;
};

StochasticBasisEnv stochastic_basis_instance(std::size_t d, std::size_t truth, bool noiseless = false);
// Probes `budget` distinct random basis arms once each and guesses the arm with
// the largest observed reward.
bool best_arm_identification_trial(std::size_t d, std::size_t budget, Rng& rng);

// max(<w,a> + b, 0) for Relu, <w,a> + b for Linear.
struct WitnessFunction {
  enum class Kind { Linear, Relu } kind = Kind::Linear;
  Vec weights;
  double bias = 0.0;
  double operator()(std::span<const double> a) const;
};

struct EluderSequence {
  std::vector<Vec> actions;
  std::vector<std::pair<WitnessFunction, WitnessFunction>> witnesses;
};

EluderSequence eluder_sequence_sparse(std::size_t d);
EluderSequence eluder_sequence_relu(const SpherePacking& packing, double eps);

// Per index: the witness pair agrees exactly on every predecessor and differs by
// at least eps at the action itself.
std::vector<bool> verify_eluder(const EluderSequence& seq, double eps);

}  // namespace violin
