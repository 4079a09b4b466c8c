#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "test_util.hpp"
#include "violin/bandit.hpp"
#include "violin/hard_instances.hpp"

using namespace violin;
using namespace violin::testing;

namespace {

double min_pairwise(const std::vector<Vec>& pts) {
  double best = 1e300;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) best = std::min(best, norm2(sub(pts[i], pts[j])));
  return best;
}

TEST(Packing, SquareBoundInTwoDimensions) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = build_packing(2, std::sqrt(2.0), seed, 10000);
    EXPECT_LE(p.points.size(), 4u);
    EXPECT_GE(p.points.size(), 2u);
    if (p.points.size() > 1) EXPECT_GE(min_pairwise(p.points), std::sqrt(2.0) * (1.0 - 1e-12));
  }
}

TEST(Packing, AntipodalBound) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) EXPECT_LE(build_packing(5, 2.0, seed, 10000).points.size(), 2u);
}

TEST(Packing, TenDimensionalSize) {
  const auto p = build_packing(10, 0.5, 1, 100000);
  EXPECT_GE(p.points.size(), 100u);
  EXPECT_GE(min_pairwise(p.points), 0.5);
  EXPECT_DOUBLE_EQ(audit_packing(p), min_pairwise(p.points));
}

TEST(Packing, ZeroAttemptsGivesEmpty) { EXPECT_TRUE(build_packing(3, 0.5, 1, 0).points.empty()); }

TEST(Packing, AuditRejectsCrowdedSet) {
  SpherePacking p{{Vec{1.0, 0.0}, Vec{std::cos(0.1), std::sin(0.1)}}, 0.5};
  EXPECT_FALSE(packing_is_valid(p));
}

TEST(Packing, TextRoundTrip) {
  const auto p = build_packing(4, 0.7, 3, 2000);
  std::stringstream ss;
  write_packing(ss, p);
  const auto q = read_packing(ss);
  EXPECT_EQ(q.separation, p.separation);
  EXPECT_EQ(q.points, p.points);
}

TEST(Needle, PackingPointsSeeOnlyTheirOwnNeedle) {
  const auto p = build_packing(5, 0.6, 2, 20000);
  const double eps = std::min(0.1, needle_eps_limit(0.6));
  const auto fam = relu_needle_family(p, eps);
  ASSERT_EQ(fam.size(), p.points.size());
  for (std::size_t i = 0; i < p.points.size(); ++i)
    for (std::size_t j = 0; j < fam.size(); ++j) {
      const double r = eta(fam[j], p.points[i]);
      if (i == j) EXPECT_NEAR(r, eps, 1e-15);
      else EXPECT_EQ(r, 0.0);
    }
  for (const auto& m : fam) EXPECT_EQ(eta(m, Vec(5, 0.0)), 0.0);
}

TEST(Needle, AtMostOneNonzeroOnRandomActions) {
  const double sep = 0.6;
  const auto p = build_packing(3, sep, 4, 20000);
  const auto fam = relu_needle_family(p, needle_eps_limit(sep));
  Rng rng(5);
  for (int k = 0; k < 10000; ++k) {
    const Vec a = k % 2 ? rng.uniform_ball(3, 1.0) : rng.unit_sphere(3);
    int nonzero = 0;
    for (const auto& m : fam) nonzero += eta(m, a) > 0.0;
    EXPECT_LE(nonzero, 1);
  }
  EXPECT_THROW(relu_needle_family(p, needle_eps_limit(sep) * 1.5), std::invalid_argument);
}

TEST(Needle, FlatRegionIsZeroZeroLocalMax) {
  const auto p = build_packing(4, 0.8, 6, 5000);
  const auto fam = relu_needle_family(p, 0.05);
  Rng rng(7);
  int checked = 0;
  for (int k = 0; k < 2000; ++k) {
    const auto& m = fam[k % fam.size()];
    const Vec a = rng.uniform_ball(4, 1.0);
    if (eta(m, a) > 0.0) continue;
    EXPECT_EQ(norm2(grad_a(m, a)), 0.0);
    EXPECT_TRUE(is_approx_local_max(m, a, {0.0, 0.0}));
    ++checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(StochasticBasis, Examples) {
  Rng rng(8);
  const auto env = stochastic_basis_instance(6, 2, true);
  EXPECT_EQ(env.reward(basis(6, 2), rng), 1.0);
  EXPECT_EQ(env.reward(basis(6, 3), rng), 0.0);
  const Vec uni(6, 1.0 / std::sqrt(6.0));
  EXPECT_NEAR(env.reward(uni, rng), 1.0 / std::sqrt(6.0), 1e-15);
  EXPECT_THROW(stochastic_basis_instance(1, 0), std::invalid_argument);
}

TEST(StochasticBasis, NoiseHasUnitVariance) {
  Rng rng(9);
  const auto env = stochastic_basis_instance(4, 0);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double r = env.reward(basis(4, 0), rng);
    s += r;
    s2 += r * r;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 1.0, 0.01);
  EXPECT_NEAR(s2 / n - mean * mean, 1.0, 0.02);
}

TEST(StochasticBasis, HalfBudgetIdentificationIsUnreliable) {
  Rng rng(10);
  int wins = 0;
  for (int k = 0; k < 200; ++k) wins += best_arm_identification_trial(32, 16, rng);
  EXPECT_LE(wins / 200.0, 0.75);
}

TEST(Eluder, SparseBasisSequence) {
  const auto seq = eluder_sequence_sparse(3);
  ASSERT_EQ(seq.actions.size(), 3u);
  for (bool b : verify_eluder(seq, 1.0)) EXPECT_TRUE(b);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& [f, g] = seq.witnesses[i];
    for (std::size_t j = 0; j < i; ++j) {
      EXPECT_EQ(f(seq.actions[j]), 0.0);
      EXPECT_EQ(g(seq.actions[j]), 0.0);
    }
    EXPECT_EQ(f(seq.actions[i]), 1.0);
    EXPECT_EQ(g(seq.actions[i]), 0.0);
  }
}

TEST(Eluder, ShuffledSparseSequenceVerifies) {
  auto seq = eluder_sequence_sparse(8);
  std::vector<std::size_t> order(8);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    EluderSequence s;
    for (std::size_t k : order) {
      s.actions.push_back(seq.actions[k]);
      s.witnesses.push_back(seq.witnesses[k]);
    }
    for (bool b : verify_eluder(s, 1.0)) EXPECT_TRUE(b);
  }
}

TEST(Eluder, ReluSequenceOnPacking) {
  const auto p = build_packing(3, 1.0, 12, 10000, 4);
  ASSERT_EQ(p.points.size(), 4u);
  const auto seq = eluder_sequence_relu(p, 0.4);
  EXPECT_GE(seq.actions.size(), 3u);
  for (bool b : verify_eluder(seq, 0.4)) EXPECT_TRUE(b);

  SpherePacking single{{Vec{0.0, 1.0, 0.0}}, 1.0};
  EXPECT_EQ(eluder_sequence_relu(single, 0.5).actions.size(), 1u);
}

TEST(Eluder, OversizedEpsIsRejected) {
  const auto p = build_packing(3, 1.0, 12, 10000, 4);
  // needles of width eps overlap once eps exceeds half the squared distance
  const double md = audit_packing(p);
  const double eps = std::min(0.99, 0.5 * md * md + 0.05);
  EXPECT_THROW(eluder_sequence_relu(p, eps), std::invalid_argument);
}

TEST(Eluder, VerifierCatchesForgedWitness) {
  auto seq = eluder_sequence_sparse(3);
  seq.witnesses[2].second.bias = 0.5;
  const auto ok = verify_eluder(seq, 1.0);
  EXPECT_TRUE(ok[0]);
  EXPECT_FALSE(ok[2]);
}

}  // namespace
