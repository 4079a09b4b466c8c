#include "violin/online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include "violin/kernels.hpp"

namespace violin {

HypothesisSet::HypothesisSet(std::vector<ModelParams> members, Provenance provenance)
    : members_(std::move(members)), provenance_(std::move(provenance)) {
  if (members_.empty()) throw std::invalid_argument("HypothesisSet: empty");
  for (const auto& m : members_)
    if (m.family() != members_.front().family() || m.action_dim() != members_.front().action_dim())
      throw std::invalid_argument("HypothesisSet: members differ in family or dimension");
}

PosteriorWeights::PosteriorWeights(Vec p) : p_(std::move(p)) {
  if (p_.empty()) throw std::invalid_argument("PosteriorWeights: empty");
  double s = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("PosteriorWeights: negative or non-finite entry");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("PosteriorWeights: entries do not sum to 1");
}

PosteriorWeights PosteriorWeights::uniform(std::size_t n) {
  return PosteriorWeights(Vec(n, 1.0 / static_cast<double>(n)));
}

PosteriorWeights PosteriorWeights::point_mass(std::size_t n, std::size_t index) {
  Vec p(n, 0.0);
  p.at(index) = 1.0;
  return PosteriorWeights(std::move(p));
}

ClipConstants ClipConstants::from(const SmoothnessConstants& s) {
  return {2.0 * s.zeta_g, 640.0 * std::numbers::sqrt2 * s.zeta_h};
}

std::array<double, 4> predict(const ModelParams& theta, const SupervisionRecord& rec) {
  return {eta(theta, rec.a_t), eta(theta, rec.a_prev), grad_dot(theta, rec.a_prev, rec.u),
          hess_form(theta, rec.a_prev, rec.u, rec.v)};
}

double bandit_loss(const ModelParams& theta, const SupervisionRecord& rec, const ClipConstants& clips) {
  const auto yhat = predict(theta, rec);
  const auto sq = [&](int i) { return (yhat[i] - rec.y[i]) * (yhat[i] - rec.y[i]); };
  return sq(0) + sq(1) + std::min(clips.kappa1 * clips.kappa1, sq(2)) + std::min(clips.kappa2 * clips.kappa2, sq(3));
}

Vec losses_for(const HypothesisSet& theta, const SupervisionRecord& rec, const ClipConstants& clips) {
  Vec out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = bandit_loss(theta[i], rec, clips);
  return out;
}

double loss_bound_full(Family f, const ClipConstants& clips) {
  const double r = eta_range(f);
  return 2.0 * r * r + clips.kappa1 * clips.kappa1 + clips.kappa2 * clips.kappa2;
}

double loss_bound(Family f, const ClipConstants& clips) {
  const double r = eta_range(f);
  double v = 2.0 * r * r + clips.kappa1 * clips.kappa1;
  if (!hessian_is_parameter_free(f)) v += clips.kappa2 * clips.kappa2;
  return v;
}

double hedge_rate(std::size_t num_hypotheses, std::size_t horizon, double v) {
  if (num_hypotheses < 2) return 1.0 / v;
  return std::sqrt(8.0 * std::log(static_cast<double>(num_hypotheses)) / static_cast<double>(horizon)) / v;
}

namespace {

Vec normalize_log(std::span<const double> log_w) {
  const double m = kernels::max_element(log_w);
  if (!std::isfinite(m)) throw NumericalUnderflow("exponential weights: no finite log-weight");
  Vec p(log_w.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_w[i] - m);
  const double s = kernels::sum(p);
  if (!(s > 0.0) || !std::isfinite(s)) throw NumericalUnderflow("exponential weights: posterior underflowed");
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

PosteriorWeights exp_weights_update(const PosteriorWeights& p, std::span<const double> losses, double lr) {
  if (losses.size() != p.size()) throw std::invalid_argument("exp_weights_update: length mismatch");
  if (!(lr > 0.0)) throw std::invalid_argument("exp_weights_update: learning rate must be positive");
  Vec log_w(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(losses[i])) throw std::invalid_argument("exp_weights_update: non-finite loss");
    log_w[i] = (p[i] > 0.0 ? std::log(p[i]) : -std::numeric_limits<double>::infinity()) - lr * losses[i];
  }
  return PosteriorWeights(normalize_log(log_w));
}

HedgeLearner::HedgeLearner(std::size_t n, double lr) : log_w_(n, 0.0), lr_(lr) {
  if (n == 0) throw std::invalid_argument("HedgeLearner: no hypotheses");
  if (!(lr > 0.0)) throw std::invalid_argument("HedgeLearner: learning rate must be positive");
}

PosteriorWeights HedgeLearner::posterior() const { return PosteriorWeights(normalize_log(log_w_)); }

void HedgeLearner::observe(std::span<const double> losses) {
  if (losses.size() != log_w_.size()) throw std::invalid_argument("HedgeLearner: length mismatch");
  for (double l : losses)
    if (!std::isfinite(l)) throw std::invalid_argument("HedgeLearner: non-finite loss");
  kernels::axpy(-lr_, losses, log_w_);
  // keep the maximum at zero so the log weights never drift toward -inf
  const double m = kernels::max_element(log_w_);
  for (double& v : log_w_) v -= m;
}

PosteriorWeights FtlLearner::posterior() const {
  const auto it = std::min_element(cumulative_.begin(), cumulative_.end());
  return PosteriorWeights::point_mass(cumulative_.size(), static_cast<std::size_t>(it - cumulative_.begin()));
}

void FtlLearner::observe(std::span<const double> losses) {
  if (losses.size() != cumulative_.size()) throw std::invalid_argument("FtlLearner: length mismatch");
  for (std::size_t i = 0; i < losses.size(); ++i) cumulative_[i] += losses[i];
}

PosteriorWeights ftl_update(const std::vector<SupervisionRecord>& history, const HypothesisSet& theta,
                            const ClipConstants& clips) {
  FtlLearner ftl(theta.size());
  for (const auto& rec : history) ftl.observe(losses_for(theta, rec, clips));
  return ftl.posterior();
}

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return static_cast<std::size_t>(std::llround(r));
}

std::size_t circle_count(double resolution) {
  const double step = 4.0 * std::asin(std::min(1.0, resolution / 2.0));
  return static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / step));
}

std::size_t face_steps(std::size_t s, double resolution) {
  const double h = 2.0 * resolution / std::sqrt(static_cast<double>(s - 1));
  return static_cast<std::size_t>(std::ceil(2.0 / h));
}

// Unit vectors on S^{s-1} with covering radius <= resolution.
std::vector<Vec> sphere_net(std::size_t s, double resolution) {
  std::vector<Vec> out;
  if (s == 1) return {{1.0}, {-1.0}};
  if (s == 2) {
    const std::size_t n = circle_count(resolution);
    for (std::size_t k = 0; k < n; ++k) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      out.push_back({std::cos(phi), std::sin(phi)});
    }
    return out;
  }
  // grid on the faces of the cube [-1,1]^s, pushed radially onto the sphere
  const std::size_t steps = face_steps(s, resolution);
  const double h = 2.0 / static_cast<double>(steps);
  const std::size_t free = s - 1;
  std::size_t per_face = 1;
  for (std::size_t i = 0; i < free; ++i) per_face *= steps + 1;
  for (std::size_t axis = 0; axis < s; ++axis)
    for (double sign : {1.0, -1.0})
      for (std::size_t idx = 0; idx < per_face; ++idx) {
        Vec x(s);
        std::size_t rem = idx;
        for (std::size_t j = 0, f = 0; j < s; ++j) {
          if (j == axis) {
            x[j] = sign;
            continue;
          }
          x[j] = -1.0 + h * static_cast<double>(rem % (steps + 1));
          rem /= steps + 1;
          ++f;
        }
        out.push_back(scaled(x, 1.0 / norm2(x)));
      }
  return out;
}

}  // namespace

std::size_t sparse_cover_size_estimate(std::size_t d, std::size_t s, double resolution) {
  std::size_t per = 2;
  if (s == 2) {
    per = circle_count(resolution);
  } else if (s > 2) {
    double n = 2.0 * static_cast<double>(s);
    for (std::size_t i = 0; i + 1 < s; ++i) n *= static_cast<double>(face_steps(s, resolution) + 1);
    per = n > 1e18 ? std::numeric_limits<std::size_t>::max() / 2 : static_cast<std::size_t>(n);
  }
  const double total = static_cast<double>(binomial(d, s)) * static_cast<double>(per);
  return total > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(total);
}

HypothesisSet build_sparse_cover(std::size_t d, std::size_t s, double resolution, std::size_t budget) {
  if (s < 1 || s > d) throw std::invalid_argument("build_sparse_cover: need 1 <= s <= d");
  if (!(resolution > 0.0 && resolution < 1.0)) throw std::invalid_argument("build_sparse_cover: resolution must lie in (0,1)");
  if (sparse_cover_size_estimate(d, s, resolution) > budget)
    throw std::length_error("build_sparse_cover: cover size exceeds budget");

  const auto net = sphere_net(s, resolution);
  std::map<std::vector<long long>, std::size_t> seen;
  std::vector<ModelParams> members;
  std::vector<std::size_t> subset(s);
  std::iota(subset.begin(), subset.end(), 0);
  for (;;) {
    for (const auto& z : net) {
      Vec x(d, 0.0);
      for (std::size_t j = 0; j < s; ++j) x[subset[j]] = z[j];
      std::vector<long long> key(d);
      for (std::size_t i = 0; i < d; ++i) key[i] = std::llround(x[i] * 1e12);
      if (seen.emplace(std::move(key), members.size()).second) members.push_back(ModelParams::linear(std::move(x)));
    }
    // next s-subset in lexicographic order
    std::size_t i = s;
    while (i > 0 && subset[i - 1] == d - s + i - 1) --i;
    if (i == 0) break;
    ++subset[i - 1];
    for (std::size_t j = i; j < s; ++j) subset[j] = subset[j - 1] + 1;
  }
  Provenance prov{Provenance::Kind::Cover, resolution,
                  std::to_string(s) + "-sparse unit vectors in R^" + std::to_string(d)};
  return HypothesisSet(std::move(members), std::move(prov));
}

double online_regret(const std::vector<Vec>& losses_per_step, std::span<const double> expected_losses) {
  if (losses_per_step.size() != expected_losses.size())
    throw std::invalid_argument("online_regret: length mismatch");
  if (losses_per_step.empty()) return 0.0;
  Vec cumulative(losses_per_step.front().size(), 0.0);
  double realized = 0.0;
  for (std::size_t t = 0; t < expected_losses.size(); ++t) {
    if (losses_per_step[t].size() != cumulative.size())
      throw std::invalid_argument("online_regret: inconsistent hypothesis count");
    realized += expected_losses[t];
    for (std::size_t k = 0; k < cumulative.size(); ++k) cumulative[k] += losses_per_step[t][k];
  }
  return realized - *std::min_element(cumulative.begin(), cumulative.end());
}

}  // namespace violin
