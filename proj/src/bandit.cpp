#include "violin/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace violin {

void FiniteDiffConfig::validate() const {
  if (!(alpha1 > 0.0 && alpha2 > 0.0)) throw std::invalid_argument("finite differences: steps must be positive");
  if (alpha1 > alpha2 * alpha2 * (1.0 + 1e-12))
    throw std::invalid_argument("finite differences: alpha1 must not exceed alpha2^2");
}

double Environment::query(std::span<const double> a) {
  ++queries_;
  return eta(truth_, a);
}

Quad Environment::query_extended(std::span<const Quad> a) {
  ++queries_;
  return eta_as<Quad>(truth_, a);
}

SupervisionRecord supervise(Environment& env, std::span<const double> a_t, std::span<const double> a_prev,
                            std::span<const double> u, std::span<const double> v, const FiniteDiffConfig& fd,
                            SupervisionMode mode) {
  const std::size_t d = env.truth().action_dim();
  check_action(a_t, d);
  check_action(a_prev, d);
  check_action(u, d);
  check_action(v, d);
  SupervisionRecord rec{Vec(a_t.begin(), a_t.end()), Vec(a_prev.begin(), a_prev.end()), Vec(u.begin(), u.end()),
                        Vec(v.begin(), v.end()), {}};
  if (mode == SupervisionMode::Analytic) {
    rec.y[0] = env.query(a_t);
    rec.y[1] = env.query(a_prev);
    rec.y[2] = grad_dot(env.truth(), a_prev, u);
    rec.y[3] = hess_form(env.truth(), a_prev, u, v);
    return rec;
  }
  fd.validate();
  using LD = Quad;
  const LD a1 = fd.alpha1;
  const LD a2 = fd.alpha2;
  std::vector<LD> p0(d), pu(d), puv(d), pv(d), at(d);
  for (std::size_t i = 0; i < d; ++i) {
    at[i] = a_t[i];
    p0[i] = a_prev[i];
    pu[i] = p0[i] + a1 * u[i];
    pv[i] = p0[i] + a2 * v[i];
    puv[i] = pu[i] + a2 * v[i];
  }
  const LD r_t = env.query_extended(at);
  const LD r0 = env.query_extended(p0);
  const LD ru = env.query_extended(pu);
  const LD ruv = env.query_extended(puv);
  const LD rv = env.query_extended(pv);
  rec.y[0] = static_cast<double>(r_t);
  rec.y[1] = static_cast<double>(r0);
  rec.y[2] = static_cast<double>((ru - r0) / a1);
  rec.y[3] = static_cast<double>(((ruv - rv) - (ru - r0)) / (a1 * a2));
  return rec;
}

double mixture_value(const PosteriorWeights& p, const HypothesisSet& theta, std::span<const double> a) {
  double s = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (p[i] > 0.0) s += p[i] * eta(theta[i], a);
  return s;
}

Vec mixture_grad(const PosteriorWeights& p, const HypothesisSet& theta, std::span<const double> a) {
  Vec g(a.size(), 0.0);
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (p[i] > 0.0) axpy(p[i], grad_a(theta[i], a), g);
  return g;
}

namespace {

Vec reference_action(const ModelParams& m) {
  return std::visit(
      [&](const auto& q) -> Vec {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, TwoLayerParams>) {
          return Vec(q.w1.cols(), 0.0);
        } else if constexpr (std::is_same_v<T, UcbTrapParams>) {
          const double n = norm2(q.theta1);
          return n > 0 ? scaled(q.theta1, 1.0 / n) : Vec(q.theta1.size(), 0.0);
        } else {
          return q.theta;
        }
      },
      m.payload());
}

Vec mixture_mean(const PosteriorWeights& p, const HypothesisSet& theta) {
  Vec m(theta.action_dim(), 0.0);
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (p[i] > 0.0) axpy(p[i], reference_action(theta[i]), m);
  return m;
}

// Projected gradient ascent with Armijo backtracking from `start`.
Vec ascend(const PosteriorWeights& p, const HypothesisSet& theta, Vec a, double radius, const AscentConfig& cfg,
           double& value) {
  value = mixture_value(p, theta, a);
  double step = cfg.initial_step;
  for (int it = 0; it < cfg.steps; ++it) {
    const Vec g = mixture_grad(p, theta, a);
    if (norm2(g) < 1e-13) break;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      Vec trial = a;
      axpy(step, g, trial);
      trial = project_ball(trial, radius);
      const double moved = dot(g, sub(trial, a));
      const double fv = mixture_value(p, theta, trial);
      if (fv >= value + 1e-4 * moved && fv > value) {
        a = std::move(trial);
        value = fv;
        accepted = true;
        break;
      }
      step *= cfg.backtrack;
    }
    if (!accepted) break;
    step = std::min(cfg.initial_step, step * 2.0);
  }
  return a;
}

}  // namespace

Vec virtual_ascent(const PosteriorWeights& p, const HypothesisSet& theta, std::span<const double> a_prev, Rng& rng,
                   const AscentConfig& cfg) {
  if (cfg.restarts < 1) throw std::invalid_argument("virtual_ascent: restarts must be >= 1");
  if (p.size() != theta.size()) throw std::invalid_argument("virtual_ascent: posterior size mismatch");
  const Family fam = theta.family();
  const double radius = action_radius(fam);
  if (fam == Family::Linear) return project_ball(mixture_mean(p, theta), radius);

  std::vector<Vec> starts;
  starts.push_back(project_ball(a_prev, radius));
  if (cfg.restarts > 1) starts.push_back(project_ball(mixture_mean(p, theta), radius));
  while (starts.size() < static_cast<std::size_t>(cfg.restarts))
    starts.push_back(rng.uniform_ball(theta.action_dim(), radius));

  Vec best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (auto& s : starts) {
    double v = 0.0;
    Vec a = ascend(p, theta, std::move(s), radius, cfg, v);
    if (v > best_value) {
      best_value = v;
      best = std::move(a);
    }
  }
  return best;
}

DeltaDiagnostics DeltaDiagnostics::from(double d1, double d2, double d3, double d4) {
  return {d1, d2, d3, d4, std::sqrt(d1 * d1 + d2 * d2 + d3 * d3 + d4 * d4)};
}

DeltaDiagnostics delta_for(const ModelParams& theta, const ModelParams& truth, std::span<const double> a_t,
                           std::span<const double> a_prev) {
  const double d1 = std::abs(eta(theta, a_t) - eta(truth, a_t));
  const double d2 = std::abs(eta(theta, a_prev) - eta(truth, a_prev));
  const double d3 = norm2(sub(grad_a(theta, a_prev), grad_a(truth, a_prev)));
  double d4 = 0.0;
  if (!(hessian_is_parameter_free(theta.family()) && theta.family() == truth.family()))
    d4 = symmetric_spectral_norm(hess_a(theta, a_prev) - hess_a(truth, a_prev));
  return DeltaDiagnostics::from(d1, d2, d3, d4);
}

bool is_approx_local_max(const ModelParams& env, std::span<const double> a, const StationaryThresholds& th) {
  if (norm2(grad_a(env, a)) > th.eps_g) return false;
  return lambda_max(hess_a(env, a)) <= th.eps_h;
}

ViolinBandit::ViolinBandit(HypothesisSet theta, ModelParams truth, BanditConfig cfg, std::uint64_t seed)
    : theta_(std::move(theta)),
      env_(std::move(truth)),
      cfg_(cfg),
      clips_(ClipConstants::from(smoothness(theta_.family()))),
      learner_(FtlLearner(theta_.size())),
      rng_(seed),
      a_prev_(theta_.action_dim(), 0.0) {
  if (env_.truth().family() != theta_.family() || env_.truth().action_dim() != theta_.action_dim())
    throw std::invalid_argument("ViolinBandit: truth and hypotheses differ in family or dimension");
  if (cfg_.mode == SupervisionMode::FiniteDiff) cfg_.fd.validate();
  if (cfg_.learner == LearnerKind::Hedge) {
    const double lr = cfg_.learning_rate.value_or(
        hedge_rate(theta_.size(), std::max<std::size_t>(cfg_.horizon, 1), loss_bound(theta_.family(), clips_)));
    learner_ = HedgeLearner(theta_.size(), lr);
  }
}

PosteriorWeights ViolinBandit::posterior() const {
  return std::visit([](const auto& l) { return l.posterior(); }, learner_);
}

StepRecord ViolinBandit::step() {
  ++t_;
  const PosteriorWeights p = posterior();
  Vec a_t;
  if (cfg_.action_rule == ActionRule::SampledTheta) {
    double u = rng_.uniform();
    std::size_t k = 0;
    while (k + 1 < p.size() && u >= p[k]) u -= p[k++];
    a_t = virtual_ascent(PosteriorWeights::point_mass(p.size(), k), theta_, a_prev_, rng_, cfg_.ascent);
  } else {
    a_t = virtual_ascent(p, theta_, a_prev_, rng_, cfg_.ascent);
  }

  const std::size_t d = theta_.action_dim();
  SupervisionRecord rec;
  Vec losses;
  for (int attempt = 0;; ++attempt) {
    const Vec u = rng_.gaussian(d);
    const Vec v = rng_.gaussian(d);
    try {
      rec = supervise(env_, a_t, a_prev_, u, v, cfg_.fd, cfg_.mode);
      losses = losses_for(theta_, rec, clips_);
      break;
    } catch (const KinkError&) {
      if (attempt + 1 >= 16) throw;
    }
  }
  std::visit([&](auto& l) { l.observe(losses); }, learner_);

  StepRecord out;
  out.step = t_;
  out.action = a_t;
  out.real_reward = rec.y[0];
  out.virtual_reward = mixture_value(p, theta_, a_t);
  out.queries = env_.queries();
  out.expected_loss = dot(p.p(), losses);
  if (cfg_.diagnostics) {
    double e1 = 0, e2 = 0, e3 = 0, e4 = 0, et = 0;
    for (std::size_t i = 0; i < theta_.size(); ++i) {
      if (p[i] == 0.0) continue;
      const auto dd = delta_for(theta_[i], env_.truth(), a_t, a_prev_);
      e1 += p[i] * dd.d1;
      e2 += p[i] * dd.d2;
      e3 += p[i] * dd.d3;
      e4 += p[i] * dd.d4;
      et += p[i] * dd.total;
    }
    out.delta = DeltaDiagnostics::from(e1, e2, e3, e4);
    out.expected_delta = et;
    try {
      out.approx_local_max = is_approx_local_max(env_.truth(), a_t, cfg_.thresholds);
    } catch (const KinkError&) {
      out.approx_local_max = false;
    }
  }
  if (cfg_.keep_posteriors) out.posterior = p.p();
  if (cfg_.keep_losses) out.losses = losses;
  history_.push_back(std::move(rec));
  a_prev_ = std::move(a_t);
  return out;
}

RunLedger run_violin(const HypothesisSet& theta, const ModelParams& truth, std::size_t T, BanditConfig cfg,
                     std::uint64_t seed) {
  if (T < 1) throw std::invalid_argument("run_violin: T must be >= 1");
  if (cfg.horizon <= 1) cfg.horizon = T;
  ViolinBandit bandit(theta, truth, cfg, seed);
  RunLedger ledger;
  ledger.seed = seed;
  ledger.initial_action = bandit.previous_action();
  ledger.records.reserve(T);
  for (std::size_t t = 0; t < T; ++t) ledger.records.push_back(bandit.step());
  return ledger;
}

double lemma1_floor(const SmoothnessConstants& s, double eps) {
  const double first = eps * eps / (4.0 * s.zeta_h);
  if (s.zeta_3rd <= 0.0) return first;
  return std::min(first, std::pow(eps, 1.5) / std::sqrt(s.zeta_3rd));
}

std::vector<Lemma1Outcome> lemma1_check(const RunLedger& ledger, const ModelParams& truth, double eps,
                                        const StationaryThresholds& th, double tol) {
  const auto s = smoothness(truth.family());
  const double floor = lemma1_floor(s, eps);
  const double c1 = 2.0 + s.zeta_g / s.zeta_h;
  std::vector<Lemma1Outcome> out;
  out.reserve(ledger.records.size());
  for (std::size_t i = 0; i < ledger.records.size(); ++i) {
    const auto& r = ledger.records[i];
    const Vec& prev = i == 0 ? ledger.initial_action : ledger.records[i - 1].action;
    Lemma1Outcome o;
    o.step = r.step;
    o.applicable = !is_approx_local_max(truth, prev, th);
    o.lhs = eta(truth, r.action);
    o.rhs = eta(truth, prev) + floor - c1 * r.expected_delta;
    o.holds = !o.applicable || o.lhs >= o.rhs - tol;
    out.push_back(o);
  }
  return out;
}

}  // namespace violin
