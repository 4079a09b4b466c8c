#pragma once

#include <cstdint>
#include <optional>

#include "violin/online.hpp"
#include "violin/random.hpp"

namespace violin::rl {

// x -> clip(B tanh(A x + b) + c), radial clipping to the unit ball.
struct DynamicsNet {
  Matrix a;
  Vec b;
  Matrix bmat;
  Vec c;
  Vec operator()(std::span<const double> x) const;
  // out = N(x) with caller-provided scratch for the hidden layer.
  void apply(std::span<const double> x, std::span<double> out, Vec& hidden) const;
  std::size_t dim() const { return a.cols(); }
};

struct DynamicsParams {
  std::size_t index = 0;
  DynamicsNet net;
};

DynamicsNet make_random_dynamics(std::size_t d, std::size_t hidden, Rng& rng, double weight_scale = 1.5,
                                 double bias_scale = 0.3, double offset_scale = 0.1);

// r(s,a) = c + <ws, s> + <wa, a> - lambda (sqrt(1 + |a|^2) - 1)
struct RewardFn {
  double constant = 0.0;
  Vec state_weights;
  Vec action_weights;
  double action_cost = 0.0;
  double operator()(std::span<const double> s, std::span<const double> a) const;
  double lipschitz() const;
};

struct InitialState {
  Vec center;
  double radius = 0.0;
  Vec sample(Rng& rng) const;
};

struct NoiseModel {
  enum class Kind { Gaussian, TwoPoint } kind = Kind::Gaussian;
  // TwoPoint draws +z or -z with probability 1/2 each.
  Vec z;
};

struct MdpSpec {
  std::size_t d = 2;
  std::size_t H = 3;
  InitialState init;
  RewardFn reward;
  double sigma = 0.5;
  NoiseModel noise;
  bool zero_noise = false;
  void validate() const;
};

struct PolicyParams {
  Matrix psi;
  explicit PolicyParams(Matrix m);
  static PolicyParams zero(std::size_t d) { return PolicyParams(Matrix(d, d)); }
  // Projection onto the operator-norm unit ball.
  static PolicyParams projected(const Matrix& m);
};

struct Trajectory {
  std::vector<Vec> states;  // s_1 .. s_{H+1}
  std::vector<Vec> actions;
  Vec rewards;
  std::vector<Vec> noises;
  std::uint64_t seed = 0;
  double total_reward() const;
};

struct RLConstants {
  std::optional<double> L0, L1, L2;  // not derived
  double chi_g = 0.0;
  double chi_f = 0.0;
  double chi_h = 0.0;
};
RLConstants example_constants(const MdpSpec& spec);

Trajectory simulate(const DynamicsNet& net, const PolicyParams& policy, const MdpSpec& spec, Rng& rng);
Trajectory rollout(const DynamicsNet& net, const PolicyParams& policy, const MdpSpec& spec, std::uint64_t seed);
Trajectory replay(const DynamicsNet& net, const PolicyParams& policy, const MdpSpec& spec, std::span<const double> s1,
                  const std::vector<Vec>& noises);

// Posterior-weighted dynamics: each rollout samples its model from probs.
struct DynamicsMixture {
  std::vector<const DynamicsNet*> nets;
  Vec probs;
  static DynamicsMixture single(const DynamicsNet& net) { return {{&net}, {1.0}}; }
  const DynamicsNet& sample(Rng& rng) const;
};

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

Estimate mc_return(const DynamicsMixture& model, const PolicyParams& policy, const MdpSpec& spec, std::size_t n,
                   std::uint64_t seed);
Estimate mc_return(const DynamicsNet& net, const PolicyParams& policy, const MdpSpec& spec, std::size_t n,
                   std::uint64_t seed);

Matrix score_grad(const Matrix& psi, std::span<const double> s, std::span<const double> a, double sigma);
double score_hess_form(const Matrix& psi, std::span<const double> s, const Matrix& v, const Matrix& w, double sigma);
double log_density(const Matrix& psi, std::span<const double> s, std::span<const double> a, double sigma);

struct MatrixEstimate {
  Matrix mean;
  Matrix se;
};

MatrixEstimate reinforce_grad(const DynamicsMixture& model, const PolicyParams& policy, const MdpSpec& spec,
                              std::size_t n, std::uint64_t seed);
MatrixEstimate reinforce_grad(const DynamicsNet& net, const PolicyParams& policy, const MdpSpec& spec, std::size_t n,
                              std::uint64_t seed);
// Estimate over vec(psi) (row-major index i*d + j), symmetrized.
MatrixEstimate reinforce_hess(const DynamicsNet& net, const PolicyParams& policy, const MdpSpec& spec, std::size_t n,
                              std::uint64_t seed);
// Gradient estimate from explicit trajectories with a leave-one-out baseline.
MatrixEstimate reinforce_from(const std::vector<Trajectory>& batch, const PolicyParams& policy, const MdpSpec& spec);

double dynamics_loss(const DynamicsNet& theta, const Trajectory& tau, const Trajectory& tau2);

struct Certificate {
  double norm = 0.0;
  double se = 0.0;
  double bound() const { return norm + 3.0 * se; }
};
Certificate certify_gradient(const DynamicsNet& truth, const PolicyParams& policy, const MdpSpec& spec,
                             std::size_t n, std::uint64_t seed);

struct Telescoping {
  double lhs = 0.0;
  double rhs = 0.0;
};
// Requires two-point noise and H <= 6; values are computed by full enumeration.
Telescoping telescoping_check(const DynamicsNet& theta_hat, const DynamicsNet& truth, const PolicyParams& policy,
                              const MdpSpec& spec, std::span<const double> s1);

struct PlannerConfig {
  int ascent_steps = 50;
  double step_size = 0.1;  // divided by sqrt(round)
  std::size_t rollouts = 256;
};

// Model-based REINFORCE ascent inside the mixture. Returns the start when a
// common-random-number comparison does not favor the result.
PolicyParams virtual_policy_ascent(const DynamicsMixture& model, const PolicyParams& start, const MdpSpec& spec,
                                   std::size_t round, const PlannerConfig& cfg, std::uint64_t seed,
                                   double* virtual_return = nullptr);

struct RlStepRecord {
  std::size_t step = 0;
  Matrix psi;
  double real_return = 0.0;
  double virtual_return = 0.0;
  double expected_loss = 0.0;
  std::uint64_t real_trajectories = 0;
  std::optional<Certificate> certificate;
};

struct RlLedger {
  std::uint64_t seed = 0;
  std::vector<RlStepRecord> records;
};

struct RlConfig {
  LearnerKind learner = LearnerKind::Ftl;
  double hedge_lr = 1.0;
  PlannerConfig planner;
  // certify the iterate every `certify_every` rounds (0 disables); stop after
  // the first certificate below `stop_below` when set
  std::size_t certify_every = 0;
  std::size_t certify_rollouts = 100'000;
  std::optional<double> stop_below;
};

class ViolinRl {
 public:
  ViolinRl(MdpSpec spec, std::vector<DynamicsNet> theta, std::size_t truth, RlConfig cfg, std::uint64_t seed);
  RlStepRecord step();
  const PolicyParams& policy() const { return psi_; }
  PosteriorWeights posterior() const;
  std::uint64_t real_trajectories() const { return real_trajectories_; }

 private:
  MdpSpec spec_;
  std::vector<DynamicsNet> theta_;
  std::size_t truth_;
  RlConfig cfg_;
  std::uint64_t seed_;
  std::variant<HedgeLearner, FtlLearner> learner_;
  PolicyParams psi_;
  std::size_t t_ = 0;
  std::uint64_t real_trajectories_ = 0;
};

RlLedger run_violin_rl(const MdpSpec& spec, const std::vector<DynamicsNet>& theta, std::size_t truth, std::size_t T,
                       const RlConfig& cfg, std::uint64_t seed);

struct Example1Instance {
  MdpSpec spec;
  std::vector<DynamicsNet> dynamics;
  std::size_t truth = 0;
};
Example1Instance example1_instance(std::size_t d, std::size_t H, std::size_t num_dynamics, std::uint64_t seed,
                                   double sigma = 0.5, std::size_t hidden = 8);

}  // namespace violin::rl
