#include "violin/metrics.hpp"

#include <cmath>

namespace violin {

StationaryThresholds paired_thresholds(const SmoothnessConstants& s, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("thresholds: eps must be positive");
  if (s.zeta_3rd <= 0.0) return {eps, -0.5};
  if (eps > std::min(1.0, s.zeta_3rd / 16.0) * (1.0 + 1e-12))
    throw std::invalid_argument("thresholds: eps must not exceed min(1, zeta_3rd / 16)");
  return {eps, 6.0 * std::sqrt(s.zeta_3rd * eps)};
}

namespace {

bool passes(const ModelParams& env, std::span<const double> a, const StationaryThresholds& th) {
  try {
    return is_approx_local_max(env, a, th);
  } catch (const KinkError&) {
    return false;
  }
}

Vec ascend_truth(const ModelParams& env, Vec a, double radius) {
  double value = eta(env, a);
  double step = 1.0;
  for (int it = 0; it < 2000; ++it) {
    const Vec g = grad_a(env, a);
    if (norm2(g) < 1e-12) break;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      Vec trial = a;
      axpy(step, g, trial);
      trial = project_ball(trial, radius);
      const double v = eta(env, trial);
      if (v > value) {
        a = std::move(trial);
        value = v;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step = std::min(4.0, step * 2.0);
  }
  return a;
}

}  // namespace

LocalMaxSet find_local_max_set(const ModelParams& env, const StationaryThresholds& th, std::size_t budget,
                               std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("find_local_max_set: budget must be >= 1");
  LocalMaxSet out;
  const std::size_t d = env.action_dim();
  if (env.family() == Family::Linear) {
    if (th.eps_h < -1.0 || th.eps_g < 0.0) return out;
    const auto& theta = std::get<LinearParams>(env.payload()).theta;
    out.status = LocalMaxSet::Status::Analytic;
    out.worst_value = 0.5 * dot(theta, theta) - 0.5 * th.eps_g * th.eps_g;
    out.members.push_back(theta);
    for (double sign : {1.0, -1.0}) {
      Vec a = theta;
      a[0] += sign * th.eps_g * (1.0 - 1e-9);
      out.members.push_back(std::move(a));
    }
    return out;
  }

  const double radius = action_radius(env.family());
  Rng rng(seed);
  std::vector<Vec> maxima;
  for (std::size_t k = 0; k < budget; ++k) {
    Vec start = rng.uniform_ball(d, radius);
    if (passes(env, start, th)) out.members.push_back(start);
    Vec m = ascend_truth(env, std::move(start), radius);
    if (!passes(env, m, th)) continue;
    bool fresh = true;
    for (const auto& x : maxima)
      if (norm2(sub(x, m)) < 1e-6) fresh = false;
    if (fresh) maxima.push_back(m);
    out.members.push_back(std::move(m));
  }
  // probe the extent of the detected region around each maximum along rays
  for (const auto& m : maxima) {
    for (std::size_t k = 0; k < budget; ++k) {
      const Vec dir = rng.unit_sphere(d);
      double lo = 0.0;
      double hi = 2.0 * radius;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        Vec a = m;
        axpy(mid, dir, a);
        if (norm2(a) <= radius && passes(env, a, th))
          lo = mid;
        else
          hi = mid;
      }
      Vec a = m;
      axpy(lo, dir, a);
      if (passes(env, a, th)) out.members.push_back(std::move(a));
    }
  }
  if (out.members.empty()) return out;
  out.status = LocalMaxSet::Status::Found;
  out.worst_value = eta(env, out.members.front());
  for (const auto& a : out.members) out.worst_value = std::min(out.worst_value, eta(env, a));
  return out;
}

LocalRegretSeries local_regret(const RunLedger& ledger, double worst_value) {
  LocalRegretSeries out;
  out.prefix.reserve(ledger.records.size());
  for (const auto& r : ledger.records) {
    const double term = worst_value - r.real_reward;
    out.signed_sum += term;
    out.clipped_sum += std::max(term, 0.0);
    out.prefix.push_back(out.signed_sum);
  }
  return out;
}

LocalRegretSeries local_regret(const RunLedger& ledger, const LocalMaxSet& set) {
  if (set.status == LocalMaxSet::Status::Empty) throw EmptyLocalMaxSet("local_regret: no approximate local maximum found");
  return local_regret(ledger, set.worst_value);
}

std::optional<Vec> optimal_action(const ModelParams& env) {
  switch (env.family()) {
    case Family::Linear: return std::get<LinearParams>(env.payload()).theta;
    case Family::Logistic: return std::get<LogisticParams>(env.payload()).theta;
    case Family::ReluNeedle: return std::get<ReluNeedleParams>(env.payload()).theta;
    case Family::UcbTrap: {
      const auto& p = std::get<UcbTrapParams>(env.payload());
      const double n = norm2(p.theta1);
      if (p.alpha != 0.0 || n == 0.0) return std::nullopt;
      return scaled(p.theta1, 1.0 / n);
    }
    case Family::TwoLayer: return std::nullopt;
  }
  return std::nullopt;
}

double standard_regret(const RunLedger& ledger, const ModelParams& env, Vec* prefix) {
  const auto best = optimal_action(env);
  if (!best) throw UnsupportedFamily("standard_regret: no known optimum for family " + std::string(family_name(env.family())));
  const double opt = eta(env, *best);
  double total = 0.0;
  if (prefix) prefix->clear();
  for (const auto& r : ledger.records) {
    total += opt - eta(env, r.action);
    if (prefix) prefix->push_back(total);
  }
  return total;
}

}  // namespace violin
