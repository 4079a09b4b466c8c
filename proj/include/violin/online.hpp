#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "violin/model.hpp"

namespace violin {

enum class LearnerKind { Hedge, Ftl };

struct Provenance {
  enum class Kind { Explicit, Cover } kind = Kind::Explicit;
  double resolution = 0.0;
  std::string description;
};

class HypothesisSet {
 public:
  explicit HypothesisSet(std::vector<ModelParams> members, Provenance provenance = {});

  const std::vector<ModelParams>& members() const { return members_; }
  const ModelParams& operator[](std::size_t i) const { return members_[i]; }
  std::size_t size() const { return members_.size(); }
  Family family() const { return members_.front().family(); }
  std::size_t action_dim() const { return members_.front().action_dim(); }
  const Provenance& provenance() const { return provenance_; }

 private:
  std::vector<ModelParams> members_;
  Provenance provenance_;
};

class PosteriorWeights {
 public:
  explicit PosteriorWeights(Vec p);
  static PosteriorWeights uniform(std::size_t n);
  static PosteriorWeights point_mass(std::size_t n, std::size_t index);

  const Vec& p() const { return p_; }
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }

 private:
  Vec p_;
};

struct ClipConstants {
  double kappa1;
  double kappa2;
  static ClipConstants from(const SmoothnessConstants& s);
};

struct SupervisionRecord {
  Vec a_t;
  Vec a_prev;
  Vec u;
  Vec v;
  std::array<double, 4> y{};
};

std::array<double, 4> predict(const ModelParams& theta, const SupervisionRecord& rec);
double bandit_loss(const ModelParams& theta, const SupervisionRecord& rec, const ClipConstants& clips);
// Loss of every member of Theta on one record.
Vec losses_for(const HypothesisSet& theta, const SupervisionRecord& rec, const ClipConstants& clips);

// Upper bound v on bandit_loss for a family: 2 range^2 + kappa1^2, plus kappa2^2
// unless every member shares the same Hessian.
double loss_bound(Family f, const ClipConstants& clips);
double loss_bound_full(Family f, const ClipConstants& clips);
// lr = sqrt(8 ln K / T) / v
double hedge_rate(std::size_t num_hypotheses, std::size_t horizon, double v);

class NumericalUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PosteriorWeights exp_weights_update(const PosteriorWeights& p, std::span<const double> losses, double lr);

// Exponential weights kept in the log domain across steps.
class HedgeLearner {
 public:
  HedgeLearner(std::size_t n, double lr);
  PosteriorWeights posterior() const;
  void observe(std::span<const double> losses);
  double lr() const { return lr_; }

 private:
  Vec log_w_;
  double lr_;
};

// Point mass on the cumulative-loss minimizer, lowest index on ties.
class FtlLearner {
 public:
  explicit FtlLearner(std::size_t n) : cumulative_(n, 0.0) {}
  PosteriorWeights posterior() const;
  void observe(std::span<const double> losses);
  const Vec& cumulative() const { return cumulative_; }

 private:
  Vec cumulative_;
};

PosteriorWeights ftl_update(const std::vector<SupervisionRecord>& history, const HypothesisSet& theta,
                            const ClipConstants& clips);

// Every s-sparse unit vector in R^d lies within `resolution` of some member.
HypothesisSet build_sparse_cover(std::size_t d, std::size_t s, double resolution, std::size_t budget = 1'000'000);
std::size_t sparse_cover_size_estimate(std::size_t d, std::size_t s, double resolution);

// sum_t E_{p_t}[l_t] - min_k sum_t l_t(k); losses_per_step[t][k] is the loss of hypothesis k at step t
double online_regret(const std::vector<Vec>& losses_per_step, std::span<const double> expected_losses);

}  // namespace violin
