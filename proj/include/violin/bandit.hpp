#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "violin/online.hpp"
#include "violin/random.hpp"

namespace violin {

struct FiniteDiffConfig {
  double alpha1 = 1e-9;
  double alpha2 = 1e-4;
  void validate() const;
};

enum class SupervisionMode { FiniteDiff, Analytic };

// Ground-truth environment with a reward-query counter. Only reward values
// leave through query(); derivatives are reached through `truth()` and are
// reserved for the analytic oracle and for diagnostics.
class Environment {
 public:
  explicit Environment(ModelParams truth) : truth_(std::move(truth)) {}
  double query(std::span<const double> a);
  Quad query_extended(std::span<const Quad> a);
  const ModelParams& truth() const { return truth_; }
  std::uint64_t queries() const { return queries_; }

 private:
  ModelParams truth_;
  std::uint64_t queries_ = 0;
};

SupervisionRecord supervise(Environment& env, std::span<const double> a_t, std::span<const double> a_prev,
                            std::span<const double> u, std::span<const double> v, const FiniteDiffConfig& fd,
                            SupervisionMode mode);

double mixture_value(const PosteriorWeights& p, const HypothesisSet& theta, std::span<const double> a);
Vec mixture_grad(const PosteriorWeights& p, const HypothesisSet& theta, std::span<const double> a);

struct AscentConfig {
  int restarts = 8;
  int steps = 200;
  double backtrack = 0.5;
  double initial_step = 4.0;
};

// argmax_a E_p eta(theta, a) over the family's action ball. Closed form for
// Linear; multi-start projected gradient ascent otherwise.
Vec virtual_ascent(const PosteriorWeights& p, const HypothesisSet& theta, std::span<const double> a_prev, Rng& rng,
                   const AscentConfig& cfg = {});

struct DeltaDiagnostics {
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  double d4 = 0.0;
  double total = 0.0;
  static DeltaDiagnostics from(double d1, double d2, double d3, double d4);
};

// Errors of one hypothesis against the truth at (a_t, a_prev).
DeltaDiagnostics delta_for(const ModelParams& theta, const ModelParams& truth, std::span<const double> a_t,
                           std::span<const double> a_prev);

struct StepRecord {
  std::size_t step = 0;
  Vec action;
  double real_reward = 0.0;
  double virtual_reward = 0.0;
  // componentwise E_p[Delta_{t,i}]; total = sqrt(sum of squares)
  DeltaDiagnostics delta;
  // E_p[Delta_t]
  double expected_delta = 0.0;
  std::uint64_t queries = 0;
  bool approx_local_max = false;
  double expected_loss = 0.0;
  Vec posterior;
  Vec losses;
};

struct RunLedger {
  std::uint64_t seed = 0;
  Vec initial_action;
  std::vector<StepRecord> records;
};

struct StationaryThresholds {
  double eps_g = 0.1;
  double eps_h = -0.5;
};

enum class ActionRule { MixtureArgmax, SampledTheta };

struct BanditConfig {
  LearnerKind learner = LearnerKind::Hedge;
  SupervisionMode mode = SupervisionMode::FiniteDiff;
  FiniteDiffConfig fd;
  AscentConfig ascent;
  ActionRule action_rule = ActionRule::MixtureArgmax;
  std::optional<double> learning_rate;  // default: hedge_rate with loss_bound
  std::size_t horizon = 1;              // used for the default learning rate
  StationaryThresholds thresholds;
  bool keep_posteriors = false;
  bool keep_losses = false;
  bool diagnostics = true;
};

class ViolinBandit {
 public:
  ViolinBandit(HypothesisSet theta, ModelParams truth, BanditConfig cfg, std::uint64_t seed);

  StepRecord step();
  const Vec& previous_action() const { return a_prev_; }
  const Environment& environment() const { return env_; }
  const HypothesisSet& hypotheses() const { return theta_; }
  const ClipConstants& clips() const { return clips_; }
  const std::vector<SupervisionRecord>& history() const { return history_; }
  PosteriorWeights posterior() const;

 private:
  HypothesisSet theta_;
  Environment env_;
  BanditConfig cfg_;
  ClipConstants clips_;
  std::variant<HedgeLearner, FtlLearner> learner_;
  Rng rng_;
  Vec a_prev_;
  std::size_t t_ = 0;
  std::vector<SupervisionRecord> history_;
};

RunLedger run_violin(const HypothesisSet& theta, const ModelParams& truth, std::size_t T, BanditConfig cfg,
                     std::uint64_t seed);

struct Lemma1Outcome {
  std::size_t step = 0;
  bool applicable = false;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
};

// Checks eta(a_t) >= eta(a_{t-1}) + floor - C1 E_p[Delta_t] at every step whose
// previous action is not an (eps, eps_h) approximate local maximum.
std::vector<Lemma1Outcome> lemma1_check(const RunLedger& ledger, const ModelParams& truth, double eps,
                                        const StationaryThresholds& th, double tol = 1e-9);
double lemma1_floor(const SmoothnessConstants& s, double eps);

bool is_approx_local_max(const ModelParams& env, std::span<const double> a, const StationaryThresholds& th);

}  // namespace violin
