#include "violin/rl.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "violin/kernels.hpp"
#include "violin/parallel.hpp"

namespace violin::rl {
namespace {

constexpr std::size_t kBlock = 1024;

// Runs fn(i, out) for every index, accumulating sum and sum of squares of the
// K-vector `out` in a fixed block order.
struct Moments {
  Vec sum;
  Vec sumsq;
};

Moments accumulate(std::size_t n, std::size_t k, const std::function<void(std::size_t, Vec&)>& fn) {
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<Moments> parts(blocks, Moments{Vec(k, 0.0), Vec(k, 0.0)});
  parallel_for(blocks, [&](std::size_t b) {
    Vec x(k);
    auto& part = parts[b];
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
      fn(i, x);
      for (std::size_t j = 0; j < k; ++j) {
        part.sum[j] += x[j];
        part.sumsq[j] += x[j] * x[j];
      }
    }
  });
  Moments total{Vec(k, 0.0), Vec(k, 0.0)};
  for (const auto& p : parts)
    for (std::size_t j = 0; j < k; ++j) {
      total.sum[j] += p.sum[j];
      total.sumsq[j] += p.sumsq[j];
    }
  return total;
}

void finish(const Moments& m, std::size_t n, Vec& mean, Vec& se) {
  const std::size_t k = m.sum.size();
  mean.assign(k, 0.0);
  se.assign(k, 0.0);
  const double nn = static_cast<double>(n);
  for (std::size_t j = 0; j < k; ++j) {
    mean[j] = m.sum[j] / nn;
    if (n > 1) {
      const double var = std::max(0.0, (m.sumsq[j] - nn * mean[j] * mean[j]) / (nn - 1.0));
      se[j] = std::sqrt(var / nn);
    }
  }
}

// Allocation-light rollout i of `seed`, drawing the same random numbers as
// simulate() on Rng(derive_seed(seed, i)) after the model draw. Writes
// the summed score (row-major d x d) and sum_h s_h s_h^T when requested.
class FastRollout {
 public:
  FastRollout(const DynamicsMixture& model, const PolicyParams& policy, const MdpSpec& spec)
      : model_(model), policy_(policy), spec_(spec), d_(spec.d), noise_(spec.H * spec.d), s_(spec.d), a_(spec.d),
        x_(spec.d), mean_(spec.d) {}

  double run(std::uint64_t seed, std::size_t i, double* score, double* ss) {
    Rng rng(derive_seed(seed, i));
    const DynamicsNet& net = model_.sample(rng);
    const Vec s1 = spec_.init.sample(rng);
    std::copy(s1.begin(), s1.end(), s_.begin());
    for (std::size_t h = 0; h < spec_.H; ++h) {
      double* z = noise_.data() + h * d_;
      if (spec_.zero_noise) {
        std::fill(z, z + d_, 0.0);
      } else if (spec_.noise.kind == NoiseModel::Kind::TwoPoint) {
        const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
        for (std::size_t j = 0; j < d_; ++j) z[j] = sign * spec_.noise.z[j];
      } else {
        for (std::size_t j = 0; j < d_; ++j) z[j] = rng.normal();
      }
    }
    if (score) std::fill(score, score + d_ * d_, 0.0);
    if (ss) std::fill(ss, ss + d_ * d_, 0.0);
    const double sigma = spec_.zero_noise ? 0.0 : spec_.sigma;
    const double inv_s2 = 1.0 / (spec_.sigma * spec_.sigma);
    const auto& k = kernels::table(kernels::active_backend());
    double total = 0.0;
    for (std::size_t h = 0; h < spec_.H; ++h) {
      k.gemv(policy_.psi.data().data(), d_, d_, s_.data(), mean_.data());
      const double* z = noise_.data() + h * d_;
      for (std::size_t j = 0; j < d_; ++j) a_[j] = mean_[j] + sigma * z[j];
      total += spec_.reward(s_, a_);
      if (score)
        for (std::size_t r = 0; r < d_; ++r) {
          const double c = (a_[r] - mean_[r]) * inv_s2;
          for (std::size_t j = 0; j < d_; ++j) score[r * d_ + j] += c * s_[j];
        }
      if (ss)
        for (std::size_t r = 0; r < d_; ++r)
          for (std::size_t j = 0; j < d_; ++j) ss[r * d_ + j] += s_[r] * s_[j];
      for (std::size_t j = 0; j < d_; ++j) x_[j] = s_[j] + a_[j];
      net.apply(x_, s_, hidden_);
    }
    return total;
  }

 private:
  const DynamicsMixture& model_;
  const PolicyParams& policy_;
  const MdpSpec& spec_;
  std::size_t d_;
  Vec noise_, s_, a_, x_, mean_, hidden_;
};

// Per-rollout return and summed score for rollouts 0..n-1.
struct ScoredReturns {
  Vec g;
  Vec f;   // n x d^2
  Vec ss;  // n x d^2, filled when requested
};

ScoredReturns scored_returns(const DynamicsMixture& model, const PolicyParams& policy, const MdpSpec& spec,
                             std::size_t n, std::uint64_t seed, bool with_ss) {
  const std::size_t k = spec.d * spec.d;
  ScoredReturns out{Vec(n), Vec(n * k), with_ss ? Vec(n * k) : Vec()};
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    FastRollout fr(model, policy, spec);
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i)
      out.g[i] = fr.run(seed, i, out.f.data() + i * k, with_ss ? out.ss.data() + i * k : nullptr);
  });
  return out;
}

// Sum over steps of the score, flattened row-major.
Vec score_sum(const Trajectory& t, const PolicyParams& policy, const MdpSpec& spec) {
  const std::size_t d = spec.d;
  Vec f(d * d, 0.0);
  for (std::size_t h = 0; h < t.actions.size(); ++h) {
    const Matrix g = score_grad(policy.psi, t.states[h], t.actions[h], spec.sigma);
    kernels::axpy(1.0, g.data(), f);
  }
  return f;
}

double loo_baseline(double total, double g, std::size_t n) {
  return n > 1 ? (total - g) / static_cast<double>(n - 1) : 0.0;
}

}  // namespace

Vec DynamicsNet::operator()(std::span<const double> x) const {
  Vec y(dim()), hidden;
  apply(x, y, hidden);
  return y;
}

void DynamicsNet::apply(std::span<const double> x, std::span<double> out, Vec& hidden) const {
  const auto& k = kernels::table(kernels::active_backend());
  hidden.resize(a.rows());
  k.gemv(a.data().data(), a.rows(), a.cols(), x.data(), hidden.data());
  for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] = std::tanh(hidden[i] + b[i]);
  k.gemv(bmat.data().data(), bmat.rows(), bmat.cols(), hidden.data(), out.data());
  double n2 = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += c[i];
    n2 += out[i] * out[i];
  }
  if (n2 > 1.0) {
    const double n = std::sqrt(n2);
    for (double& v : out) v /= n;
  }
}

DynamicsNet make_random_dynamics(std::size_t d, std::size_t hidden, Rng& rng, double weight_scale, double bias_scale,
                                 double offset_scale) {
  DynamicsNet n{Matrix(hidden, d), Vec(hidden), Matrix(d, hidden), Vec(d)};
  for (double& v : n.a.data()) v = rng.normal() * weight_scale / std::sqrt(static_cast<double>(d));
  for (double& v : n.b) v = rng.normal() * bias_scale;
  for (double& v : n.bmat.data()) v = rng.normal() * weight_scale / std::sqrt(static_cast<double>(hidden));
  for (double& v : n.c) v = rng.normal() * offset_scale;
  return n;
}

double RewardFn::operator()(std::span<const double> s, std::span<const double> a) const {
  double r = constant;
  if (!state_weights.empty()) r += dot(state_weights, s);
  if (!action_weights.empty()) r += dot(action_weights, a);
  if (action_cost != 0.0) r -= action_cost * (std::sqrt(1.0 + dot(a, a)) - 1.0);
  return r;
}

double RewardFn::lipschitz() const {
  return (state_weights.empty() ? 0.0 : norm2(state_weights)) +
         (action_weights.empty() ? 0.0 : norm2(action_weights)) + std::abs(action_cost);
}

Vec InitialState::sample(Rng& rng) const {
  if (radius <= 0.0) return center;
  return add(center, rng.uniform_ball(center.size(), radius));
}

void MdpSpec::validate() const {
  if (d < 1 || H < 1) throw std::invalid_argument("MdpSpec: d and H must be >= 1");
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("MdpSpec: sigma must lie in (0, 1)");
  if (init.center.size() != d) throw std::invalid_argument("MdpSpec: initial state dimension mismatch");
  if (norm2(init.center) + init.radius > 1.0 + 1e-12) throw std::invalid_argument("MdpSpec: initial states leave the unit ball");
  if (!reward.state_weights.empty() && reward.state_weights.size() != d)
    throw std::invalid_argument("MdpSpec: reward state weights dimension mismatch");
  if (!reward.action_weights.empty() && reward.action_weights.size() != d)
    throw std::invalid_argument("MdpSpec: reward action weights dimension mismatch");
  if (noise.kind == NoiseModel::Kind::TwoPoint && noise.z.size() != d)
    throw std::invalid_argument("MdpSpec: two-point noise vector dimension mismatch");
}

PolicyParams::PolicyParams(Matrix m) : psi(std::move(m)) {
  if (psi.rows() != psi.cols()) throw std::invalid_argument("PolicyParams: psi must be square");
  if (operator_norm(psi) > 1.0 + 1e-9) throw std::invalid_argument("PolicyParams: operator norm exceeds 1");
}

PolicyParams PolicyParams::projected(const Matrix& m) { return PolicyParams(project_operator_norm(m, 1.0)); }

double Trajectory::total_reward() const { return kernels::sum(rewards); }

RLConstants example_constants(const MdpSpec& spec) {
  const double s2 = spec.sigma * spec.sigma;
  return RLConstants{std::nullopt, std::nullopt, std::nullopt, 1.0 / s2, 3.0 / (s2 * s2), 1.0};
}

Trajectory simulate(const DynamicsNet& net, const PolicyParams& policy, const MdpSpec& spec, Rng& rng) {
  const Vec s1 = spec.init.sample(rng);
  std::vector<Vec> noises;
  noises.reserve(spec.H);
  for (std::size_t h = 0; h < spec.H; ++h) {
    if (spec.zero_noise) {
      noises.emplace_back(spec.d, 0.0);
    } else if (spec.noise.kind == NoiseModel::Kind::TwoPoint) {
      noises.push_back(scaled(spec.noise.z, rng.uniform() < 0.5 ? 1.0 : -1.0));
    } else {
      noises.push_back(rng.gaussian(spec.d));
    }
  }
  return replay(net, policy, spec, s1, noises);
}

Trajectory rollout(const DynamicsNet& net, const PolicyParams& policy, const MdpSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  Trajectory t = simulate(net, policy, spec, rng);
  t.seed = seed;
  return t;
}

Trajectory replay(const DynamicsNet& net, const PolicyParams& policy, const MdpSpec& spec, std::span<const double> s1,
                  const std::vector<Vec>& noises) {
  Trajectory t;
  t.states.emplace_back(s1.begin(), s1.end());
  const double sigma = spec.zero_noise ? 0.0 : spec.sigma;
  for (std::size_t h = 0; h < noises.size(); ++h) {
    const Vec& s = t.states.back();
    Vec a = policy.psi * s;
    axpy(sigma, noises[h], a);
    t.rewards.push_back(spec.reward(s, a));
    Vec next = net(add(s, a));
    t.actions.push_back(std::move(a));
    t.states.push_back(std::move(next));
  }
  t.noises = noises;
  return t;
}

const DynamicsNet& DynamicsMixture::sample(Rng& rng) const {
  if (nets.size() == 1) return *nets.front();
  double u = rng.uniform();
  for (std::size_t k = 0; k + 1 < nets.size(); ++k) {
    if (u < probs[k]) return *nets[k];
    u -= probs[k];
  }
  return *nets.back();
}

Estimate mc_return(const DynamicsMixture& model, const PolicyParams& policy, const MdpSpec& spec, std::size_t n,
                   std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("mc_return: n must be >= 1");
  Vec g(n);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    FastRollout fr(model, policy, spec);
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) g[i] = fr.run(seed, i, nullptr, nullptr);
  });
  const auto m = accumulate(n, 1, [&](std::size_t i, Vec& x) { x[0] = g[i]; });
  Vec mean, se;
  finish(m, n, mean, se);
  return {mean[0], se[0]};
}

Estimate mc_return(const DynamicsNet& net, const PolicyParams& policy, const MdpSpec& spec, std::size_t n,
                   std::uint64_t seed) {
  return mc_return(DynamicsMixture::single(net), policy, spec, n, seed);
}

Matrix score_grad(const Matrix& psi, std::span<const double> s, std::span<const double> a, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("score_grad: sigma must be positive");
  const Vec resid = sub(a, psi * s);
  return Matrix::outer(resid, s) * (1.0 / (sigma * sigma));
}

double score_hess_form(const Matrix& psi, std::span<const double> s, const Matrix& v, const Matrix& w, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("score_hess_form: sigma must be positive");
  if (v.rows() != psi.rows() || w.rows() != psi.rows()) throw std::invalid_argument("score_hess_form: shape mismatch");
  return -dot(w * s, v * s) / (sigma * sigma);
}

double log_density(const Matrix& psi, std::span<const double> s, std::span<const double> a, double sigma) {
  const Vec r = sub(a, psi * s);
  const double d = static_cast<double>(a.size());
  return -0.5 * dot(r, r) / (sigma * sigma) - d * std::log(sigma) - 0.5 * d * std::log(2.0 * std::numbers::pi);
}

MatrixEstimate reinforce_grad(const DynamicsMixture& model, const PolicyParams& policy, const MdpSpec& spec,
                              std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("reinforce_grad: n must be >= 1");
  const std::size_t d = spec.d;
  const std::size_t k = d * d;
  const ScoredReturns r = scored_returns(model, policy, spec, n, seed, false);
  const double total = kernels::sum(r.g);
  const auto m = accumulate(n, k, [&](std::size_t i, Vec& x) {
    const double w = r.g[i] - loo_baseline(total, r.g[i], n);
    for (std::size_t j = 0; j < k; ++j) x[j] = w * r.f[i * k + j];
  });
  Vec mean, se;
  finish(m, n, mean, se);
  return {Matrix(d, d, std::move(mean)), Matrix(d, d, std::move(se))};
}

MatrixEstimate reinforce_grad(const DynamicsNet& net, const PolicyParams& policy, const MdpSpec& spec, std::size_t n,
                              std::uint64_t seed) {
  return reinforce_grad(DynamicsMixture::single(net), policy, spec, n, seed);
}

MatrixEstimate reinforce_from(const std::vector<Trajectory>& batch, const PolicyParams& policy, const MdpSpec& spec) {
  const std::size_t n = batch.size();
  if (n < 1) throw std::invalid_argument("reinforce_from: empty batch");
  const std::size_t d = spec.d;
  double total = 0.0;
  for (const auto& t : batch) total += t.total_reward();
  Moments m{Vec(d * d, 0.0), Vec(d * d, 0.0)};
  for (const auto& t : batch) {
    Vec x = score_sum(t, policy, spec);
    const double w = t.total_reward() - loo_baseline(total, t.total_reward(), n);
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] *= w;
      m.sum[j] += x[j];
      m.sumsq[j] += x[j] * x[j];
    }
  }
  Vec mean, se;
  finish(m, n, mean, se);
  return {Matrix(d, d, std::move(mean)), Matrix(d, d, std::move(se))};
}

MatrixEstimate reinforce_hess(const DynamicsNet& net, const PolicyParams& policy, const MdpSpec& spec, std::size_t n,
                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("reinforce_hess: n must be >= 1");
  const std::size_t d = spec.d;
  if (d > 4) throw std::length_error("reinforce_hess: d^2 x d^2 estimate exceeds the d <= 4 budget");
  const std::size_t k = d * d;
  const auto model = DynamicsMixture::single(net);
  const ScoredReturns r = scored_returns(model, policy, spec, n, seed, true);
  const double total = kernels::sum(r.g);
  const double inv_s2 = 1.0 / (spec.sigma * spec.sigma);
  const auto m = accumulate(n, k * k, [&](std::size_t i, Vec& x) {
    const double* f = r.f.data() + i * k;
    const double* ss = r.ss.data() + i * k;
    const double w = r.g[i] - loo_baseline(total, r.g[i], n);
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) {
        double h = f[p] * f[q];
        // d^2 log pi / d psi_ij d psi_kl = -delta_ik s_j s_l / sigma^2
        if (p / d == q / d) h -= inv_s2 * ss[(p % d) * d + q % d];
        x[p * k + q] = w * h;
      }
  });
  Vec mean, se;
  finish(m, n, mean, se);
  Matrix mm(k, k, std::move(mean));
  Matrix ms(k, k, std::move(se));
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = p + 1; q < k; ++q) {
      mm(p, q) = mm(q, p) = 0.5 * (mm(p, q) + mm(q, p));
      ms(p, q) = ms(q, p) = 0.5 * (ms(p, q) + ms(q, p));
    }
  return {std::move(mm), std::move(ms)};
}

double dynamics_loss(const DynamicsNet& theta, const Trajectory& tau, const Trajectory& tau2) {
  double loss = 0.0;
  for (const Trajectory* t : {&tau, &tau2})
    for (std::size_t h = 0; h < t->actions.size(); ++h)
      loss += kernels::squared_distance(theta(add(t->states[h], t->actions[h])), t->states[h + 1]);
  return loss;
}

Certificate certify_gradient(const DynamicsNet& truth, const PolicyParams& policy, const MdpSpec& spec,
                             std::size_t n, std::uint64_t seed) {
  const auto est = reinforce_grad(truth, policy, spec, n, seed);
  const double norm = est.mean.frobenius_norm();
  double var = 0.0;
  for (std::size_t i = 0; i < est.mean.data().size(); ++i) {
    const double w = norm > 0.0 ? est.mean.data()[i] / norm : 1.0;
    var += w * w * est.se.data()[i] * est.se.data()[i];
  }
  return {norm, std::sqrt(var)};
}

namespace {

struct Enumerator {
  const PolicyParams& policy;
  const MdpSpec& spec;

  // Expected return from step h at state s under `net`.
  double value(const DynamicsNet& net, std::size_t h, const Vec& s) const {
    if (h == spec.H) return 0.0;
    double v = 0.0;
    for (double sign : {1.0, -1.0}) {
      Vec a = policy.psi * s;
      axpy(sign * spec.sigma, spec.noise.z, a);
      v += 0.5 * (spec.reward(s, a) + value(net, h + 1, net(add(s, a))));
    }
    return v;
  }

  // E over truth trajectories of sum_h [V_hat(h+1, hat(s,a)) - V_hat(h+1, truth(s,a))]
  double telescoped(const DynamicsNet& hat, const DynamicsNet& truth, std::size_t h, const Vec& s) const {
    if (h == spec.H) return 0.0;
    double v = 0.0;
    for (double sign : {1.0, -1.0}) {
      Vec a = policy.psi * s;
      axpy(sign * spec.sigma, spec.noise.z, a);
      const Vec x = add(s, a);
      const Vec next = truth(x);
      const double term = value(hat, h + 1, hat(x)) - value(hat, h + 1, next);
      v += 0.5 * (term + telescoped(hat, truth, h + 1, next));
    }
    return v;
  }
};

}  // namespace

Telescoping telescoping_check(const DynamicsNet& theta_hat, const DynamicsNet& truth, const PolicyParams& policy,
                              const MdpSpec& spec, std::span<const double> s1) {
  if (spec.noise.kind != NoiseModel::Kind::TwoPoint) throw std::invalid_argument("telescoping_check: needs two-point noise");
  if (spec.H > 6) throw std::length_error("telescoping_check: enumeration budget exceeded (H > 6)");
  const Enumerator e{policy, spec};
  const Vec s(s1.begin(), s1.end());
  return {e.value(theta_hat, 0, s) - e.value(truth, 0, s), e.telescoped(theta_hat, truth, 0, s)};
}

PolicyParams virtual_policy_ascent(const DynamicsMixture& model, const PolicyParams& start, const MdpSpec& spec,
                                   std::size_t round, const PlannerConfig& cfg, std::uint64_t seed,
                                   double* virtual_return) {
  const double step = cfg.step_size / std::sqrt(static_cast<double>(std::max<std::size_t>(round, 1)));
  PolicyParams psi = start;
  for (int k = 0; k < cfg.ascent_steps; ++k) {
    const auto g = reinforce_grad(model, psi, spec, cfg.rollouts, derive_seed(seed, static_cast<std::uint64_t>(k) + 1));
    psi = PolicyParams::projected(psi.psi + g.mean * step);
  }
  const std::uint64_t check = derive_seed(seed, 0);
  const Estimate end = mc_return(model, psi, spec, cfg.rollouts, check);
  const Estimate begin = mc_return(model, start, spec, cfg.rollouts, check);
  if (end.mean >= begin.mean) {
    if (virtual_return) *virtual_return = end.mean;
    return psi;
  }
  if (virtual_return) *virtual_return = begin.mean;
  return start;
}

ViolinRl::ViolinRl(MdpSpec spec, std::vector<DynamicsNet> theta, std::size_t truth, RlConfig cfg, std::uint64_t seed)
    : spec_(std::move(spec)),
      theta_(std::move(theta)),
      truth_(truth),
      cfg_(cfg),
      seed_(seed),
      learner_(FtlLearner(theta_.size())),
      psi_(PolicyParams::zero(spec_.d)) {
  spec_.validate();
  if (theta_.empty()) throw std::invalid_argument("ViolinRl: empty dynamics class");
  if (truth_ >= theta_.size()) throw std::invalid_argument("ViolinRl: truth index out of range");
  if (cfg_.learner == LearnerKind::Hedge) learner_ = HedgeLearner(theta_.size(), cfg_.hedge_lr);
}

PosteriorWeights ViolinRl::posterior() const {
  return std::visit([](const auto& l) { return l.posterior(); }, learner_);
}

RlStepRecord ViolinRl::step() {
  ++t_;
  const PosteriorWeights p = posterior();
  DynamicsMixture mix;
  for (std::size_t i = 0; i < theta_.size(); ++i)
    if (p[i] > 0.0) {
      mix.nets.push_back(&theta_[i]);
      mix.probs.push_back(p[i]);
    }
  RlStepRecord rec;
  rec.step = t_;
  const PolicyParams prev = psi_;
  psi_ = virtual_policy_ascent(mix, prev, spec_, t_, cfg_.planner, derive_seed(seed_, 3 * t_), &rec.virtual_return);
  const Trajectory tau = rollout(theta_[truth_], psi_, spec_, derive_seed(seed_, 3 * t_ + 1));
  const Trajectory tau_prev = rollout(theta_[truth_], prev, spec_, derive_seed(seed_, 3 * t_ + 2));
  real_trajectories_ += 2;
  Vec losses(theta_.size());
  for (std::size_t i = 0; i < theta_.size(); ++i) losses[i] = dynamics_loss(theta_[i], tau, tau_prev);
  std::visit([&](auto& l) { l.observe(losses); }, learner_);
  rec.psi = psi_.psi;
  rec.real_return = tau.total_reward();
  rec.expected_loss = dot(p.p(), losses);
  rec.real_trajectories = real_trajectories_;
  if (cfg_.certify_every > 0 && t_ % cfg_.certify_every == 0)
    rec.certificate = certify_gradient(theta_[truth_], psi_, spec_, cfg_.certify_rollouts,
                                       derive_seed(seed_ ^ 0xCE27ULL, t_));
  return rec;
}

RlLedger run_violin_rl(const MdpSpec& spec, const std::vector<DynamicsNet>& theta, std::size_t truth, std::size_t T,
                       const RlConfig& cfg, std::uint64_t seed) {
  if (T < 1) throw std::invalid_argument("run_violin_rl: T must be >= 1");
  ViolinRl alg(spec, theta, truth, cfg, seed);
  RlLedger ledger;
  ledger.seed = seed;
  for (std::size_t t = 0; t < T; ++t) {
    ledger.records.push_back(alg.step());
    const auto& c = ledger.records.back().certificate;
    if (cfg.stop_below && c && c->bound() <= *cfg.stop_below) break;
  }
  return ledger;
}

Example1Instance example1_instance(std::size_t d, std::size_t H, std::size_t num_dynamics, std::uint64_t seed,
                                   double sigma, std::size_t hidden) {
  Rng rng(seed);
  Example1Instance inst;
  inst.spec.d = d;
  inst.spec.H = H;
  inst.spec.sigma = sigma;
  inst.spec.init = InitialState{Vec(d, 0.0), 0.5};
  inst.spec.reward.state_weights = rng.unit_sphere(d);
  inst.spec.reward.action_cost = 2.0;
  for (std::size_t k = 0; k < num_dynamics; ++k) inst.dynamics.push_back(make_random_dynamics(d, hidden, rng));
  inst.truth = rng.index(num_dynamics);
  inst.spec.validate();
  return inst;
}

}  // namespace violin::rl
