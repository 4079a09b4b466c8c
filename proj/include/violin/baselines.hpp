#pragma once

#include "violin/bandit.hpp"
#include "violin/hard_instances.hpp"
#include "violin/rl.hpp"

namespace violin {

class ConsistencySet {
 public:
  explicit ConsistencySet(std::size_t n);
  // Keeps the members whose prediction at a equals the observed reward within tol.
  void update(const HypothesisSet& theta, std::span<const double> a, double reward, double tol = 1e-12);
  const std::vector<std::size_t>& indices() const { return indices_; }
  bool contains(std::size_t i) const;

 private:
  std::vector<std::size_t> indices_;
};

// Upper confidence bound max over the consistency set of eta(theta, a).
double tightest_ucb(const ConsistencySet& cs, const HypothesisSet& theta, std::span<const double> a);
// Index of the candidate with the largest bound, lowest index on ties.
std::size_t ucb_tightest_step(const ConsistencySet& cs, const HypothesisSet& theta, const std::vector<Vec>& candidates);

struct UcbTrapInstance {
  HypothesisSet theta;
  std::size_t truth = 0;
  std::vector<Vec> candidates;
  SpherePacking packing;  // embedded in R^d, orthogonal to theta1
  Vec optimal_action;
  double optimal_value = 0.0;
};

// theta1 = e_d, one alpha = 1 bump hypothesis per packing point of the
// orthogonal complement, truth with alpha = 0 appended last.
UcbTrapInstance ucb_trap_instance(std::size_t d, std::size_t packing_size, std::uint64_t seed,
                                  double separation = 0.5);

struct UcbRun {
  std::vector<std::size_t> chosen;  // candidate indices
  std::vector<Vec> actions;
  Vec rewards;
  std::vector<std::size_t> consistent_sizes;
  // packing members whose bump action has been played so far, per step
  std::vector<std::size_t> probed_members;
  // optimism margin: C_t(a*) - eta(truth, a*) per step
  Vec optimism;
  bool truth_always_consistent = true;
};

UcbRun run_ucb_tightest(const UcbTrapInstance& inst, std::size_t T);

struct ZerothOrderSchedule {
  double step0 = 1.0;  // step_t = step0 / (t + d)
  double smoothing = 1e-3;
};

RunLedger zeroth_order_ascent(Environment& env, std::size_t T, const ZerothOrderSchedule& schedule, std::uint64_t seed);

class CancellationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SparseSearchResult {
  std::vector<std::size_t> support;
  std::size_t queries = 0;
};

// Bisection over normalized indicator probes with the raw <theta, a> oracle.
SparseSearchResult sparse_binary_search(const Vec& theta_star, std::size_t s);
std::size_t sparse_search_query_bound(std::size_t d, std::size_t s);

namespace rl {

struct ReinforceConfig {
  std::size_t batch = 16;
  double step_size = 0.1;  // divided by sqrt(update)
  std::size_t certify_every = 5;
  std::size_t certify_rollouts = 100'000;
  std::optional<double> stop_below;
};

// Model-free REINFORCE ascent on real trajectories only, until the
// trajectory budget is spent.
RlLedger reinforce_baseline_rl(const MdpSpec& spec, const DynamicsNet& truth, std::size_t trajectory_budget,
                               const ReinforceConfig& cfg, std::uint64_t seed);

}  // namespace rl
}  // namespace violin
