#include "violin/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace violin {

ConsistencySet::ConsistencySet(std::size_t n) : indices_(n) {
  for (std::size_t i = 0; i < n; ++i) indices_[i] = i;
}

void ConsistencySet::update(const HypothesisSet& theta, std::span<const double> a, double reward, double tol) {
  std::vector<std::size_t> keep;
  for (std::size_t i : indices_)
    if (std::abs(eta(theta[i], a) - reward) <= tol) keep.push_back(i);
  indices_ = std::move(keep);
}

bool ConsistencySet::contains(std::size_t i) const {
  return std::find(indices_.begin(), indices_.end(), i) != indices_.end();
}

double tightest_ucb(const ConsistencySet& cs, const HypothesisSet& theta, std::span<const double> a) {
  if (cs.indices().empty()) throw std::logic_error("tightest UCB: empty consistency set");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i : cs.indices()) best = std::max(best, eta(theta[i], a));
  return best;
}

std::size_t ucb_tightest_step(const ConsistencySet& cs, const HypothesisSet& theta, const std::vector<Vec>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("tightest UCB: no candidate actions");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double v = tightest_ucb(cs, theta, candidates[k]);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  return best;
}

UcbTrapInstance ucb_trap_instance(std::size_t d, std::size_t packing_size, std::uint64_t seed, double separation) {
  if (d < 3) throw std::invalid_argument("ucb_trap_instance: d must be >= 3");
  const SpherePacking low = build_packing(d - 1, separation, seed, 1'000'000, packing_size);
  if (low.points.size() < packing_size)
    throw std::runtime_error("ucb_trap_instance: could not place the requested number of packing points");
  Vec theta1(d, 0.0);
  theta1[d - 1] = 1.0;

  SpherePacking packing;
  packing.separation = separation;
  std::vector<ModelParams> members;
  std::vector<Vec> candidates;
  for (const auto& q : low.points) {
    Vec p(q.begin(), q.end());
    p.push_back(0.0);
    members.push_back(ModelParams::ucb_trap(theta1, p, 1.0));
    packing.points.push_back(p);
  }
  // bump-optimal actions first, so ties resolve toward probing bumps
  for (const auto& p : packing.points) {
    Vec b = p;
    axpy(1.0 / 64.0, theta1, b);
    candidates.push_back(scaled(b, 1.0 / norm2(b)));
  }
  for (const auto& p : packing.points) candidates.push_back(p);
  candidates.push_back(theta1);
  members.push_back(ModelParams::ucb_trap(theta1, packing.points.front(), 0.0));
  const std::size_t truth = members.size() - 1;
  UcbTrapInstance inst{HypothesisSet(std::move(members)), truth, std::move(candidates), std::move(packing), theta1, 0.0};
  inst.optimal_value = eta(inst.theta[truth], theta1);
  return inst;
}

UcbRun run_ucb_tightest(const UcbTrapInstance& inst, std::size_t T) {
  const std::size_t m = inst.packing.points.size();
  ConsistencySet cs(inst.theta.size());
  UcbRun run;
  std::vector<bool> probed(m, false);
  std::size_t probed_count = 0;
  Environment env(inst.theta[inst.truth]);
  for (std::size_t t = 0; t < T; ++t) {
    run.optimism.push_back(tightest_ucb(cs, inst.theta, inst.optimal_action) - inst.optimal_value);
    const std::size_t k = ucb_tightest_step(cs, inst.theta, inst.candidates);
    const Vec& a = inst.candidates[k];
    const double r = env.query(a);
    cs.update(inst.theta, a, r);
    if (k < m && !probed[k]) {
      probed[k] = true;
      ++probed_count;
    }
    run.chosen.push_back(k);
    run.actions.push_back(a);
    run.rewards.push_back(r);
    run.consistent_sizes.push_back(cs.indices().size());
    run.probed_members.push_back(probed_count);
    if (!cs.contains(inst.truth)) run.truth_always_consistent = false;
  }
  return run;
}

RunLedger zeroth_order_ascent(Environment& env, std::size_t T, const ZerothOrderSchedule& schedule, std::uint64_t seed) {
  if (T < 1) throw std::invalid_argument("zeroth_order_ascent: T must be >= 1");
  const std::size_t d = env.truth().action_dim();
  const double radius = action_radius(env.truth().family());
  const double alpha = schedule.smoothing;
  Rng rng(seed);
  RunLedger ledger;
  ledger.seed = seed;
  Vec a(d, 0.0);
  ledger.initial_action = a;
  for (std::size_t t = 1; t <= T; ++t) {
    const Vec u = rng.unit_sphere(d);
    const double r = env.query(a);
    Vec probe = a;
    axpy(alpha, u, probe);
    const double rp = env.query(probe);
    StepRecord rec;
    rec.step = t;
    rec.action = a;
    rec.real_reward = r;
    rec.queries = env.queries();
    ledger.records.push_back(std::move(rec));
    const double coef = static_cast<double>(d) / alpha * (rp - r);
    const double step = schedule.step0 / static_cast<double>(t + d);
    Vec next = a;
    axpy(step * coef, u, next);
    a = project_ball(next, radius);
  }
  return ledger;
}

std::size_t sparse_search_query_bound(std::size_t d, std::size_t s) {
  std::size_t lg = 0;
  while ((std::size_t{1} << lg) < d) ++lg;
  return s * (lg + 1) + s;
}

SparseSearchResult sparse_binary_search(const Vec& theta_star, std::size_t s) {
  const std::size_t d = theta_star.size();
  if (d == 0) throw std::invalid_argument("sparse_binary_search: empty parameter");
  constexpr double tol = 1e-9;
  SparseSearchResult out;
  // raw oracle: <theta*, 1_S / sqrt|S|>, rescaled to the sum over S
  auto probe_sum = [&](std::size_t lo, std::size_t hi) {
    Vec a(d, 0.0);
    const double w = 1.0 / std::sqrt(static_cast<double>(hi - lo));
    for (std::size_t i = lo; i < hi; ++i) a[i] = w;
    ++out.queries;
    const double r = dot(theta_star, a);
    return r / w;
  };
  auto check = [&](double v) {
    if (v < -tol) throw CancellationError("sparse_binary_search: negative half-sum, support values are not positive");
  };
  const double root = probe_sum(0, d);
  check(root);
  // depth-first bisection; the right half's sum is inferred from its parent
  struct Node {
    std::size_t lo, hi;
    double sum;
  };
  std::vector<Node> stack;
  if (root > tol) stack.push_back({0, d, root});
  while (!stack.empty()) {
    const Node n = stack.back();
    stack.pop_back();
    if (n.hi - n.lo == 1) {
      out.support.push_back(n.lo);
      continue;
    }
    const std::size_t mid = n.lo + (n.hi - n.lo + 1) / 2;
    const double left = probe_sum(n.lo, mid);
    const double right = n.sum - left;
    check(left);
    check(right);
    if (right > tol) stack.push_back({mid, n.hi, right});
    if (left > tol) stack.push_back({n.lo, mid, left});
  }
  std::sort(out.support.begin(), out.support.end());
  if (out.support.size() > s) throw std::invalid_argument("sparse_binary_search: support larger than s");
  return out;
}

namespace rl {

RlLedger reinforce_baseline_rl(const MdpSpec& spec, const DynamicsNet& truth, std::size_t trajectory_budget,
                               const ReinforceConfig& cfg, std::uint64_t seed) {
  if (cfg.batch < 1) throw std::invalid_argument("reinforce_baseline_rl: batch must be >= 1");
  spec.validate();
  RlLedger ledger;
  ledger.seed = seed;
  PolicyParams psi = PolicyParams::zero(spec.d);
  std::uint64_t used = 0;
  for (std::size_t k = 1; used + cfg.batch <= trajectory_budget; ++k) {
    std::vector<Trajectory> batch;
    for (std::size_t i = 0; i < cfg.batch; ++i) batch.push_back(rollout(truth, psi, spec, derive_seed(seed, used + i)));
    used += cfg.batch;
    const auto g = reinforce_from(batch, psi, spec);
    const double step = cfg.step_size / std::sqrt(static_cast<double>(k));
    psi = PolicyParams::projected(psi.psi + g.mean * step);
    RlStepRecord rec;
    rec.step = k;
    rec.psi = psi.psi;
    double ret = 0.0;
    for (const auto& t : batch) ret += t.total_reward();
    rec.real_return = ret / static_cast<double>(batch.size());
    rec.real_trajectories = used;
    if (cfg.certify_every > 0 && k % cfg.certify_every == 0)
      rec.certificate = certify_gradient(truth, psi, spec, cfg.certify_rollouts, derive_seed(seed ^ 0xCE27ULL, k));
    ledger.records.push_back(std::move(rec));
    const auto& c = ledger.records.back().certificate;
    if (cfg.stop_below && c && c->bound() <= *cfg.stop_below) break;
  }
  return ledger;
}

}  // namespace rl
}  // namespace violin
