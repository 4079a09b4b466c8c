#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "violin/baselines.hpp"
#include "violin/hard_instances.hpp"
#include "violin/metrics.hpp"
#include "violin/rl.hpp"

using namespace violin;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(Vec v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct LinearSetup {
  HypothesisSet theta;
  ModelParams truth;
};

LinearSetup linear_setup(std::size_t d, std::size_t k, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 77));
  std::vector<ModelParams> members;
  for (std::size_t i = 0; i < k; ++i) members.push_back(ModelParams::linear(rng.unit_sphere(d)));
  const std::size_t truth = rng.index(k);
  ModelParams t = members[truth];
  return {HypothesisSet(std::move(members)), std::move(t)};
}

// 1: FTL with analytic supervision gets within 0.2 of the truth.
Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = linear_setup(16, 16, seed);
    BanditConfig cfg;
    cfg.learner = LearnerKind::Ftl;
    cfg.mode = SupervisionMode::Analytic;
    cfg.horizon = 2000;
    const auto ledger = run_violin(s.theta, s.truth, 2000, cfg, seed);
    const Vec& ts = std::get<LinearParams>(s.truth.payload()).theta;
    double best = 1e300;
    for (const auto& r : ledger.records) best = std::min(best, norm2(sub(ts, r.action)));
    hits += best <= 0.2;
  }
  const double secs = seconds_since(t0);
  return {hits >= 4 && secs <= 60.0, fmt("%d/10 seeds reach 0.2, %.1fs", hits, secs)};
}

// 2: Hedge local regret per step shrinks from T=500 to T=4000.
Outcome criterion2() {
  const StationaryThresholds th{0.1, -0.5};
  Vec short_run, long_run;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = linear_setup(16, 16, seed);
    const auto set = find_local_max_set(s.truth, th, 1, seed);
    for (std::size_t T : {500, 4000}) {
      BanditConfig cfg;
      cfg.learner = LearnerKind::Hedge;
      cfg.mode = SupervisionMode::Analytic;
      cfg.horizon = T;
      cfg.thresholds = th;
      const auto ledger = run_violin(s.theta, s.truth, T, cfg, seed);
      const double avg = local_regret(ledger, set).signed_sum / static_cast<double>(T);
      (T == 500 ? short_run : long_run).push_back(avg);
    }
  }
  const double a = median(short_run), b = median(long_run);
  return {b <= (2.0 / 3.0) * a, fmt("median R/T: %.5f at 500, %.5f at 4000, ratio %.3f", a, b, b / a)};
}

// 3: clipped bilinear second moment against its lower bound.
Outcome criterion3() {
  const double kappa2 = 640.0 * std::sqrt(2.0);
  const double c1 = 1.0;
  const std::size_t N = 200000;
  Rng rng(3);
  bool ok = true;
  std::string detail;
  for (double fro : {0.1, 1.0, 10.0}) {
    Matrix h(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j <= i; ++j) h(i, j) = h(j, i) = rng.normal();
    h = h * (fro / h.frobenius_norm());
    double sum = 0.0, sq = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const Vec u = rng.gaussian(5), v = rng.gaussian(5);
      const double b = dot(u, h * v);
      const double x = std::min(kappa2 * kappa2, b * b);
      sum += x;
      sq += x * x;
    }
    const double mean = sum / N;
    const double se = std::sqrt(std::max(0.0, sq / N - mean * mean) / N);
    const double bound = 0.5 * std::min(c1 * c1, fro * fro) * (1.0 - 3.0 * se / mean);
    ok = ok && mean >= bound;
    detail += fmt("|H|=%g: %.4g >= %.4g; ", fro, mean, bound);
  }
  return {ok, detail};
}

// 4: one-step improvement at every non-stationary step.
Outcome criterion4() {
  const StationaryThresholds th{0.1, -0.5};
  std::size_t violations = 0, applicable = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = linear_setup(16, 16, seed);
    BanditConfig cfg;
    cfg.horizon = 500;
    cfg.thresholds = th;
    const auto ledger = run_violin(s.theta, s.truth, 500, cfg, seed);
    for (const auto& o : lemma1_check(ledger, s.truth, th.eps_g, th, 1e-9)) {
      applicable += o.applicable;
      violations += !o.holds;
    }
  }
  return {violations == 0, fmt("%zu violations over %zu non-stationary steps", violations, applicable)};
}

// 5: tightest UCB over-explores the trap; ViOlin does not.
Outcome criterion5() {
  const auto inst = ucb_trap_instance(8, 64, 1);
  const auto run = run_ucb_tightest(inst, 200);
  bool spread = true, low = true;
  std::size_t phase = 0;
  for (std::size_t t = 0; t < run.actions.size() && run.probed_members[t] < 60; ++t, ++phase) {
    for (std::size_t u = 0; u < t; ++u) spread = spread && norm2(sub(run.actions[u], run.actions[t])) >= 1.0 / 130.0;
    low = low && run.rewards[t] <= inst.optimal_value - 31.0 / 2048.0;
  }
  const bool reached = phase < run.actions.size();
  Vec tail;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    BanditConfig cfg;
    cfg.horizon = 1000;
    const auto ledger = run_violin(inst.theta, inst.theta[inst.truth], 1000, cfg, seed);
    double mean = 0.0;
    for (std::size_t t = 900; t < 1000; ++t) mean += ledger.records[t].real_reward;
    tail.push_back(mean / 100.0);
  }
  const double med = median(tail);
  const bool violin_ok = med >= 0.9 * inst.optimal_value;
  return {spread && low && reached && violin_ok,
          fmt("UCB probing phase %zu steps (spread %s, reward gap %s); ViOlin tail median %.5f vs optimum %.5f", phase,
              spread ? "ok" : "violated", low ? "ok" : "violated", med, inst.optimal_value)};
}

// 6: needles are hard to find by probing; flat steps carry zero local regret.
Outcome criterion6() {
  const auto packing = build_packing(10, 0.6, 6, 1'000'000, 200);
  const std::size_t M = packing.points.size();
  const double eps = std::min(0.1, needle_eps_limit(packing.separation));
  const auto family = relu_needle_family(packing, eps);
  Rng rng(66);
  int found = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto& truth = family[rng.index(M)];
    std::vector<std::size_t> order(M);
    for (std::size_t i = 0; i < M; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng.engine());
    bool hit = false;
    for (std::size_t q = 0; q < M / 2 && !hit; ++q) hit = eta(truth, packing.points[order[q]]) > 0.0;
    found += hit;
  }
  const double frac = found / 100.0;

  const std::size_t truth = rng.index(M);
  BanditConfig cfg;
  cfg.horizon = 100;
  cfg.thresholds = {0.0, 0.0};
  const auto ledger = run_violin(HypothesisSet(family), family[truth], 100, cfg, 6);
  const auto set = find_local_max_set(family[truth], {0.0, 0.0}, 64, 6);
  const auto lr = local_regret(ledger, set);
  std::size_t flat = 0;
  bool zero = set.worst_value == 0.0;
  for (std::size_t t = 0; t < ledger.records.size(); ++t) {
    const auto& a = ledger.records[t].action;
    if (dot(std::get<ReluNeedleParams>(family[truth].payload()).theta, a) - 1.0 + eps >= 0.0) continue;
    ++flat;
    const double term = lr.prefix[t] - (t ? lr.prefix[t - 1] : 0.0);
    zero = zero && term == 0.0;
  }
  return {M >= 200 && frac <= 0.6 && zero && flat > 0,
          fmt("M=%zu, success fraction %.2f; %zu flat steps, local regret terms %s", M, frac, flat,
              zero ? "all zero" : "nonzero")};
}

// 7: finite differences converge at first order.
Outcome criterion7() {
  Rng rng(7);
  bool ok = true;
  std::string detail;
  for (Family f : {Family::Logistic, Family::TwoLayer}) {
    std::vector<ModelParams> params;
    std::vector<Vec> a, u, v;
    for (int k = 0; k < 100; ++k) {
      if (f == Family::Logistic) {
        params.push_back(ModelParams::logistic(rng.unit_sphere(4)));
      } else {
        Matrix w1(4, 4);
        for (std::size_t r = 0; r < 4; ++r) {
          const Vec row = rng.unit_sphere(4);
          for (std::size_t c = 0; c < 4; ++c) w1(r, c) = 0.4 * row[c];
        }
        Vec w2 = rng.unit_sphere(4);
        for (double& x : w2) x *= 0.4;
        params.push_back(ModelParams::two_layer(std::move(w1), std::move(w2)));
      }
      a.push_back(rng.uniform_ball(4, 1.5));
      u.push_back(rng.unit_sphere(4));
      v.push_back(rng.unit_sphere(4));
    }
    // mean absolute error of the gradient (i = 2) or Hessian (i = 3) projection
    const auto error = [&](const FiniteDiffConfig& fd, int i) {
      double e = 0.0;
      for (int k = 0; k < 100; ++k) {
        Environment env(params[k]);
        const auto fdr = supervise(env, a[k], a[k], u[k], v[k], fd, SupervisionMode::FiniteDiff);
        const auto an = supervise(env, a[k], a[k], u[k], v[k], fd, SupervisionMode::Analytic);
        e += std::abs(fdr.y[i] - an.y[i]);
      }
      return e / 100.0;
    };
    for (double alpha2 : {1e-3, 1e-4}) {
      const double h = error({alpha2 * alpha2, alpha2}, 3) / error({alpha2 * alpha2 / 4.0, alpha2 / 2.0}, 3);
      const double alpha1 = alpha2;
      const double g = error({alpha1, std::sqrt(alpha1)}, 2) / error({alpha1 / 2.0, std::sqrt(alpha1)}, 2);
      ok = ok && h >= 1.5 && h <= 2.5 && g >= 1.5 && g <= 2.5;
      detail += fmt("%s a=%g: hess %.3f grad %.3f; ", std::string(family_name(f)).c_str(), alpha2, h, g);
    }
  }
  return {ok, detail};
}

// 8: telescoping identity and REINFORCE against central differences.
Outcome criterion8() {
  double worst_tel = 0.0;
  Rng rng(8);
  for (int k = 0; k < 20; ++k) {
    const std::size_t H = 1 + k % 3;
    auto inst = rl::example1_instance(2, H, 1, 800 + k);
    inst.spec.noise = rl::NoiseModel{rl::NoiseModel::Kind::TwoPoint, Vec{0.8, -0.6}};
    const auto hat = rl::make_random_dynamics(2, 6, rng);
    Matrix m(2, 2);
    for (double& x : m.data()) x = rng.normal();
    const rl::PolicyParams p(m * (0.8 / operator_norm(m)));
    const Vec s1 = rng.uniform_ball(2, 0.5);
    const auto t = rl::telescoping_check(hat, inst.dynamics[0], p, inst.spec, s1);
    worst_tel = std::max(worst_tel, std::abs(t.lhs - t.rhs));
  }

  const auto inst = rl::example1_instance(2, 3, 1, 0);
  Rng prng(1000);
  Matrix m(2, 2);
  for (double& x : m.data()) x = prng.normal();
  m = m * (0.5 / operator_norm(m));
  const std::size_t n = 100000;
  const auto g = rl::reinforce_grad(inst.dynamics[0], rl::PolicyParams(m), inst.spec, n, 7);
  Matrix fd(2, 2);
  const double h = 1e-4;
  for (std::size_t i = 0; i < 4; ++i) {
    Matrix plus = m, minus = m;
    plus.data()[i] += h;
    minus.data()[i] -= h;
    fd.data()[i] = (rl::mc_return(inst.dynamics[0], rl::PolicyParams(plus), inst.spec, n, 99).mean -
                    rl::mc_return(inst.dynamics[0], rl::PolicyParams(minus), inst.spec, n, 99).mean) /
                   (2.0 * h);
  }
  const double rel = (g.mean - fd).frobenius_norm() / fd.frobenius_norm();
  const double se_rel = g.se.frobenius_norm() / fd.frobenius_norm();
  return {worst_tel <= 1e-10 && rel <= 0.01,
          fmt("telescoping max |lhs-rhs| %.2e; REINFORCE rel. error %.4f (estimator SE/|grad| %.4f)", worst_tel, rel,
              se_rel)};
}

// 9: Alg. 2 reaches a small certified gradient with 2 real trajectories per round.
Outcome criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  const double target = 0.3;
  const std::size_t T = 500;
  const std::size_t n_cert = 100000;

  // real trajectories ViOlin used when its certificate first reached the target; 0 if never
  std::vector<std::uint64_t> violin_reach(10, 0);
  Vec best_bounds;
  bool counts_ok = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = rl::example1_instance(3, 5, 8, seed);
    rl::ViolinRl alg(inst.spec, inst.dynamics, inst.truth, rl::RlConfig{}, seed);
    const bool full = seed < 5;
    double best = 1e300;
    for (std::size_t t = 1; t <= T; ++t) {
      alg.step();
      const bool due = violin_reach[seed] == 0 || t % 50 == 0 || t == T;
      if (!due) continue;
      const auto c = rl::certify_gradient(inst.dynamics[inst.truth], alg.policy(), inst.spec, n_cert,
                                          derive_seed(seed ^ 0xCE27ULL, t));
      best = std::min(best, c.bound());
      if (violin_reach[seed] == 0 && c.bound() <= target) {
        violin_reach[seed] = alg.real_trajectories();
        if (!full) break;
      }
    }
    if (full) {
      best_bounds.push_back(best);
      counts_ok = counts_ok && alg.real_trajectories() == 2 * T;
    }
  }

  int baseline_needs_more = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    if (violin_reach[seed] == 0) continue;
    const auto inst = rl::example1_instance(3, 5, 8, seed);
    const auto& truth = inst.dynamics[inst.truth];
    const auto c0 = rl::certify_gradient(truth, rl::PolicyParams::zero(3), inst.spec, n_cert,
                                         derive_seed(seed ^ 0xCE27ULL, 0));
    bool reached = c0.bound() <= target;
    if (!reached) {
      rl::ReinforceConfig cfg;
      cfg.batch = 2;
      cfg.certify_every = 1;
      cfg.certify_rollouts = n_cert;
      cfg.stop_below = target;
      const auto ledger = rl::reinforce_baseline_rl(inst.spec, truth, violin_reach[seed], cfg, 1000 + seed);
      for (const auto& r : ledger.records) reached = reached || (r.certificate && r.certificate->bound() <= target);
    }
    baseline_needs_more += !reached;
  }
  const double med = median(best_bounds);
  const double secs = seconds_since(t0);
  std::string reach;
  for (auto r : violin_reach) reach += " " + std::to_string(r);
  return {med <= target && counts_ok && baseline_needs_more >= 7 && secs <= 600.0,
          fmt("median best certificate %.3f; trajectories %s; baseline needs more in %d/10 (ViOlin reach:%s); %.0fs",
              med, counts_ok ? "= 2T" : "!= 2T", baseline_needs_more, reach.c_str(), secs)};
}

// 10: sparse binary search recovers the support within the query bound.
Outcome criterion10() {
  const std::size_t d = 64, s = 2;
  const std::size_t bound = s * (static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(d)))) + 1) + s;
  Rng rng(10);
  int exact = 0;
  std::size_t worst = 0;
  for (int k = 0; k < 100; ++k) {
    std::vector<std::size_t> idx(d);
    for (std::size_t i = 0; i < d; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    std::vector<std::size_t> support(idx.begin(), idx.begin() + s);
    std::sort(support.begin(), support.end());
    Vec theta(d, 0.0);
    for (auto i : support) theta[i] = 0.1 + rng.uniform();
    theta = scaled(theta, 1.0 / norm2(theta));
    const auto r = sparse_binary_search(theta, s);
    auto got = r.support;
    std::sort(got.begin(), got.end());
    exact += got == support && r.queries <= bound;
    worst = std::max(worst, r.queries);
  }
  return {exact == 100, fmt("%d/100 exact within %zu queries (max used %zu)", exact, bound, worst)};
}

// 11: best-arm identification on the stochastic basis instance.
Outcome criterion11() {
  Rng rng(11);
  int wins = 0;
  for (int k = 0; k < 200; ++k) wins += best_arm_identification_trial(32, 16, rng);
  const double frac = wins / 200.0;
  return {frac <= 0.75, fmt("success fraction %.3f", frac)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"C1 linear FTL convergence", criterion1},     {"C2 local regret sublinearity", criterion2},
      {"C3 clipped bilinear moment", criterion3},    {"C4 improvement lemma", criterion4},
      {"C5 UCB over-exploration", criterion5},       {"C6 ReLU needle", criterion6},
      {"C7 finite-difference order", criterion7},    {"C8 RL identities", criterion8},
      {"C9 model-based RL convergence", criterion9}, {"C10 sparse binary search", criterion10},
      {"C11 best-arm identification", criterion11},
  };
  const auto selected = [&](const std::string& name) {
    if (argc < 2) return true;
    for (int i = 1; i < argc; ++i)
      if (name.substr(0, name.find(' ')) == argv[i]) return true;
    return false;
  };
  int failures = 0;
  std::size_t ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!selected(name)) continue;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(ran) - failures, ran);
  return failures == 0 ? 0 : 1;
}
