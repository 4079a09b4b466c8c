#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "violin/metrics.hpp"

using namespace violin;
using namespace violin::testing;

namespace {

RunLedger ledger_of(const std::vector<Vec>& actions, const ModelParams& env) {
  RunLedger l;
  for (std::size_t t = 0; t < actions.size(); ++t) {
    StepRecord r;
    r.step = t + 1;
    r.action = actions[t];
    r.real_reward = eta(env, actions[t]);
    l.records.push_back(std::move(r));
  }
  return l;
}

// Closed-form Logistic detector and value, scanned on a grid.
double logistic_grid_worst(const Vec& theta, const StationaryThresholds& th, double h) {
  const double c = std::numbers::e / ((std::numbers::e + 1.0) * (std::numbers::e + 1.0));
  const double tt = theta[0] * theta[0] + theta[1] * theta[1];
  double worst = std::numeric_limits<double>::infinity();
  const long n = std::lround(2.0 / h);
  for (long i = -n; i <= n; ++i) {
    const double x = i * h;
    for (long j = -n; j <= n; ++j) {
      const double y = j * h;
      const double r2 = x * x + y * y;
      if (r2 > 4.0) continue;
      const double z = theta[0] * x + theta[1] * y;
      const double s = 1.0 / (1.0 + std::exp(-z));
      const double s1 = s * (1.0 - s);
      const double s2 = s1 * (1.0 - 2.0 * s);
      const double gx = theta[0] * s1 - c * x, gy = theta[1] * s1 - c * y;
      if (std::sqrt(gx * gx + gy * gy) > th.eps_g) continue;
      if (std::max(s2 * tt - c, -c) > th.eps_h) continue;
      worst = std::min(worst, s - 0.5 * c * r2);
    }
  }
  return worst;
}

}  // namespace

TEST(Thresholds, PairedDefaults) {
  const auto lin = paired_thresholds(smoothness(Family::Linear), 0.1);
  EXPECT_DOUBLE_EQ(lin.eps_g, 0.1);
  EXPECT_DOUBLE_EQ(lin.eps_h, -0.5);
  const auto two = paired_thresholds(smoothness(Family::TwoLayer), 0.01);
  EXPECT_DOUBLE_EQ(two.eps_h, 6.0 * std::sqrt(0.01));
  EXPECT_THROW(paired_thresholds(smoothness(Family::TwoLayer), 0.1), std::invalid_argument);
  EXPECT_THROW(paired_thresholds(smoothness(Family::Linear), 0.0), std::invalid_argument);
}

TEST(Detector, Examples) {
  const auto lin = ModelParams::linear({0.6, 0.8});
  EXPECT_TRUE(is_approx_local_max(lin, Vec{0.6, 0.8}, {0.0, -1.0}));
  EXPECT_FALSE(is_approx_local_max(lin, Vec{0.0, 0.0}, {0.1, -0.5}));
  const auto needle = ModelParams::relu_needle({1.0, 0.0}, 0.1);
  EXPECT_TRUE(is_approx_local_max(needle, Vec{-0.5, 0.3}, {0.0, 0.0}));
}

TEST(LocalMaxSet, LinearAnalytic) {
  Rng rng(1);
  for (int k = 0; k < 10; ++k) {
    const Vec theta = random_unit(4, rng);
    const auto env = ModelParams::linear(theta);
    const StationaryThresholds th{0.1, -0.5};
    const auto set = find_local_max_set(env, th, 8, 3);
    ASSERT_EQ(set.status, LocalMaxSet::Status::Analytic);
    EXPECT_NEAR(set.worst_value, 0.5 - 0.005, 1e-12);
    for (const auto& a : set.members) {
      EXPECT_TRUE(is_approx_local_max(env, a, th));
      EXPECT_LE(set.worst_value, eta(env, a) + 1e-12);
    }
  }
}

TEST(LocalMaxSet, ReluNeedleFlatWorstIsZero) {
  Rng rng(2);
  const auto env = ModelParams::relu_needle(random_unit(3, rng), 0.2);
  const auto set = find_local_max_set(env, {0.0, 0.0}, 32, 5);
  ASSERT_EQ(set.status, LocalMaxSet::Status::Found);
  EXPECT_EQ(set.worst_value, 0.0);
}

TEST(LocalMaxSet, EmptyStatusPropagates) {
  const auto env = ModelParams::relu_needle({1.0, 0.0}, 0.2);
  const auto set = find_local_max_set(env, {0.1, -0.5}, 16, 5);
  EXPECT_EQ(set.status, LocalMaxSet::Status::Empty);
  RunLedger l;
  EXPECT_THROW(local_regret(l, set), EmptyLocalMaxSet);
  EXPECT_THROW(find_local_max_set(env, {0.1, -0.5}, 0, 5), std::invalid_argument);
}

TEST(LocalMaxSet, LogisticMatchesGridOracle) {
  const Vec theta{0.6, -0.8};
  const auto env = ModelParams::logistic(theta);
  const auto th = paired_thresholds(smoothness(Family::Logistic), 0.0078125);
  const auto set = find_local_max_set(env, th, 64, 11);
  ASSERT_EQ(set.status, LocalMaxSet::Status::Found);
  const double grid = logistic_grid_worst(theta, th, 1e-3);
  ASSERT_TRUE(std::isfinite(grid));
  EXPECT_NEAR(set.worst_value, grid, 1e-3);
}

TEST(LocalMaxSet, DetectorConsistency) {
  Rng rng(3);
  for (Family f : {Family::Logistic, Family::TwoLayer}) {
    for (int k = 0; k < 3; ++k) {
      const auto env = random_params(f, 3, rng);
      const auto th = paired_thresholds(smoothness(f), f == Family::Logistic ? 0.005 : 0.05);
      const auto set = find_local_max_set(env, th, 16, 100 + k);
      for (const auto& a : set.members) {
        EXPECT_TRUE(is_approx_local_max(env, a, th));
        EXPECT_LE(set.worst_value, eta(env, a));
      }
    }
  }
}

TEST(LocalMaxSet, MonotoneInThresholds) {
  Rng rng(4);
  for (Family f : {Family::Logistic, Family::TwoLayer, Family::Linear}) {
    const auto env = random_params(f, 3, rng);
    std::vector<Vec> probes;
    for (int k = 0; k < 2000; ++k) probes.push_back(rng.uniform_ball(3, 2.0));
    const auto ascent = find_local_max_set(env, {0.05, 0.5}, 8, 9);
    probes.insert(probes.end(), ascent.members.begin(), ascent.members.end());
    const StationaryThresholds small{0.05, -0.05}, large{0.2, 0.1};
    for (const auto& a : probes)
      if (is_approx_local_max(env, a, small)) EXPECT_TRUE(is_approx_local_max(env, a, large));
  }
}

TEST(LocalRegret, HandSummedSyntheticLedger) {
  RunLedger l;
  const std::vector<double> rewards{0.1, 0.7, -0.2, 0.4};
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    StepRecord r;
    r.step = t + 1;
    r.real_reward = rewards[t];
    l.records.push_back(r);
  }
  const auto s = local_regret(l, 0.5);
  EXPECT_NEAR(s.signed_sum, 0.4 - 0.2 + 0.7 + 0.1, 1e-15);
  EXPECT_NEAR(s.clipped_sum, 0.4 + 0.7 + 0.1, 1e-15);
  ASSERT_EQ(s.prefix.size(), 4u);
  EXPECT_NEAR(s.prefix[0], 0.4, 1e-15);
  EXPECT_NEAR(s.prefix[1], 0.2, 1e-15);
  EXPECT_NEAR(s.prefix[2], 0.9, 1e-15);
  EXPECT_NEAR(s.prefix[3], 1.0, 1e-15);
}

TEST(LocalRegret, ActionsAtWorstMemberGiveZero) {
  const auto env = ModelParams::logistic({0.0, 1.0});
  const auto th = paired_thresholds(smoothness(Family::Logistic), 0.005);
  const auto set = find_local_max_set(env, th, 16, 1);
  ASSERT_EQ(set.status, LocalMaxSet::Status::Found);
  std::size_t worst = 0;
  for (std::size_t i = 0; i < set.members.size(); ++i)
    if (eta(env, set.members[i]) == set.worst_value) worst = i;
  const auto l = ledger_of(std::vector<Vec>(20, set.members[worst]), env);
  EXPECT_EQ(local_regret(l, set).signed_sum, 0.0);
}

TEST(LocalRegret, SingletonRunIsNeverPositive) {
  Rng rng(5);
  const auto truth = ModelParams::linear(random_unit(3, rng));
  BanditConfig cfg;
  cfg.horizon = 30;
  const auto l = run_violin(HypothesisSet({truth}), truth, 30, cfg, 7);
  const auto set = find_local_max_set(truth, cfg.thresholds, 4, 1);
  const auto s = local_regret(l, set);
  EXPECT_EQ(s.clipped_sum, 0.0);
  for (double p : s.prefix) EXPECT_LE(p, 0.0);
}

TEST(LocalRegret, IndependentAccumulatorAgrees) {
  Rng rng(6);
  const auto truth = ModelParams::logistic(random_unit(3, rng));
  std::vector<ModelParams> members{truth};
  for (int k = 0; k < 5; ++k) members.push_back(ModelParams::logistic(random_unit(3, rng)));
  BanditConfig cfg;
  cfg.horizon = 40;
  cfg.thresholds = paired_thresholds(smoothness(Family::Logistic), 0.005);
  const auto l = run_violin(HypothesisSet(members), truth, 40, cfg, 3);
  const double w = -0.1;
  const auto s = local_regret(l, w);
  double acc = 0.0;
  for (const auto& r : l.records) acc += w - eta(truth, r.action);
  EXPECT_NEAR(s.signed_sum, acc, 1e-10);
}

TEST(StandardRegret, Examples) {
  const Vec theta{0.3, -0.4, 0.6};
  const auto env = ModelParams::linear(theta);
  EXPECT_EQ(standard_regret(ledger_of(std::vector<Vec>(7, theta), env), env), 0.0);
  Vec prefix;
  const double r = standard_regret(ledger_of(std::vector<Vec>(7, Vec(3, 0.0)), env), env, &prefix);
  EXPECT_NEAR(r, 7.0 * 0.5 * (0.09 + 0.16 + 0.36), 1e-12);
  ASSERT_EQ(prefix.size(), 7u);
  EXPECT_NEAR(prefix[2], 3.0 * 0.5 * (0.09 + 0.16 + 0.36), 1e-12);
}

TEST(StandardRegret, MatchesBruteForceOnRun) {
  Rng rng(7);
  const auto truth = ModelParams::linear(random_unit(4, rng));
  std::vector<ModelParams> members{truth};
  for (int k = 0; k < 7; ++k) members.push_back(ModelParams::linear(random_unit(4, rng)));
  BanditConfig cfg;
  cfg.horizon = 50;
  const auto l = run_violin(HypothesisSet(members), truth, 50, cfg, 4);
  const Vec& theta = std::get<LinearParams>(truth.payload()).theta;
  double brute = 0.0;
  for (const auto& rec : l.records) {
    double sq = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) sq += (theta[i] - rec.action[i]) * (theta[i] - rec.action[i]);
    brute += 0.5 * sq;
  }
  const double r = standard_regret(l, truth);
  EXPECT_NEAR(r, brute, 1e-10);
  EXPECT_GE(r, 0.0);
}

TEST(StandardRegret, LogisticOptimumIsTheta) {
  const Vec theta{0.0, 1.0};
  const auto env = ModelParams::logistic(theta);
  EXPECT_EQ(*optimal_action(env), theta);
  Rng rng(8);
  for (int k = 0; k < 1000; ++k) EXPECT_LE(eta(env, rng.uniform_ball(2, 2.0)), eta(env, theta) + 1e-15);
}

TEST(StandardRegret, UnsupportedFamily) {
  Rng rng(9);
  const auto env = random_params(Family::TwoLayer, 3, rng);
  EXPECT_FALSE(optimal_action(env).has_value());
  RunLedger l;
  EXPECT_THROW(standard_regret(l, env), UnsupportedFamily);
}
