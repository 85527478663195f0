#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "lexp/baselines.hpp"
#include "lexp/environment.hpp"
#include "lexp/experiment.hpp"

using lexp::Rng;

TEST(Cucb, IndexValue) {
  // 0.5 + sqrt(3 ln 3 / 12)
  EXPECT_NEAR(lexp::cucb_index(0.5, 3, 6), 1.0240735, 1e-6);
  EXPECT_DOUBLE_EQ(lexp::cucb_index(0.25, 1, 4), 0.25);
}

TEST(Cucb, BonusStrictlyMonotone) {
  for (std::size_t t = 2; t < 50; ++t)
    for (std::size_t n = 1; n < 50; ++n) {
      EXPECT_LT(lexp::cucb_bonus(t, n + 1), lexp::cucb_bonus(t, n));
      EXPECT_GT(lexp::cucb_bonus(t + 1, n), lexp::cucb_bonus(t, n));
    }
}

TEST(Cucb, WarmupCoversEveryArm) {
  auto s = lexp::make_cucb_state(7);
  std::vector<int> pulled(7, 0);
  EXPECT_EQ(lexp::cucb_warmup_rounds(7, 3), 3u);
  for (int t = 0; t < 3; ++t) {
    const auto sel = lexp::cucb_select(s, 3);
    ASSERT_EQ(sel.size(), 3u);
    for (std::size_t i : sel) ++pulled[i];
    lexp::RoundObservation obs{sel, std::vector<double>(3, 1.0), std::vector<double>(3, 1.0)};
    s = lexp::cucb_update(s, obs, lexp::RewardTarget::FirstLevel);
  }
  for (int c : pulled) EXPECT_GE(c, 1);
}

TEST(Cucb, TiesGoToLowerIndex) {
  auto s = lexp::make_cucb_state(4);
  s.round = 10;
  s.empirical_mean = {0.5, 0.5, 0.5, 0.5};
  s.pull_count = {3, 3, 3, 3};
  EXPECT_EQ(lexp::cucb_select(s, 2), (std::vector<std::size_t>{0, 1}));
}

TEST(Cucb, RunningMeanUpdate) {
  auto s = lexp::make_cucb_state(3);
  s.empirical_mean = {0.5, 0.2, 0.0};
  s.pull_count = {1, 4, 0};
  lexp::RoundObservation obs{{0}, {1.0}, {0.5}};
  const auto first = lexp::cucb_update(s, obs, lexp::RewardTarget::FirstLevel);
  EXPECT_DOUBLE_EQ(first.empirical_mean[0], 0.75);
  EXPECT_EQ(first.pull_count[0], 2u);
  EXPECT_EQ(first.empirical_mean[1], 0.2);
  EXPECT_EQ(first.pull_count[1], 4u);
  const auto compound = lexp::cucb_update(s, obs, lexp::RewardTarget::Compound);
  EXPECT_DOUBLE_EQ(compound.empirical_mean[0], 0.5);
}

TEST(Exp3m, FirstRoundMarginals) {
  const auto hp = lexp::make_exp3m_hyperparams(8, 3, 0.2);
  EXPECT_DOUBLE_EQ(hp.zeta, 3 * 0.2 / 8);
  const auto [cap, x] = lexp::lexp_marginals(lexp::make_lexp_state(8), hp);
  EXPECT_FALSE(cap.alpha.has_value());
  for (double v : x.probs) EXPECT_NEAR(v, 3.0 / 8.0, 1e-12);
}

// Exp3.M on compound rewards and LExp with h = 0 and the same learning rate
// make identical choices from the same seed.
TEST(Exp3m, MatchesLexpWithZeroThreshold) {
  const std::size_t k = 6, l = 2;
  const double gamma = 0.15;
  const auto e_hp = lexp::make_exp3m_hyperparams(k, l, gamma);
  auto l_hp = lexp::make_lexp_hyperparams(k, lexp::ProblemSpec{l, 0.0, 1}, gamma, 0.5);
  l_hp.zeta = e_hp.zeta;

  auto es = lexp::make_exp3m_state(k);
  auto ls = lexp::make_lexp_state(k);
  Rng r1(31), r2(31), env(32);
  for (int t = 0; t < 2000; ++t) {
    lexp::RewardDraw draw{std::vector<double>(k), std::vector<double>(k)};
    for (std::size_t i = 0; i < k; ++i) {
      draw.first_level[i] = env.bernoulli(0.1 * static_cast<double>(i + 1)) ? 1.0 : 0.0;
      draw.second_level[i] = env.uniform01();
    }
    const auto er = lexp::exp3m_round(es, e_hp, lexp::RewardTarget::Compound, r1, draw);
    const auto lr = lexp::lexp_round(ls, draw, l_hp, r2);
    ASSERT_EQ(er.observation.selected, lr.observation.selected) << "round " << t;
    ASSERT_EQ(er.next.weights, lr.next.weights);
    ASSERT_EQ(lr.next.lambda, 0.0);
    es = er.next;
    ls = lr.next;
  }
}

TEST(Exp3m, MarginalsSumToL) {
  const auto hp = lexp::make_exp3m_hyperparams(10, 4, 0.1);
  auto s = lexp::make_exp3m_state(10);
  Rng rng(33), env(34);
  for (int t = 0; t < 3000; ++t) {
    lexp::RewardDraw draw{std::vector<double>(10), std::vector<double>(10, 1.0)};
    for (std::size_t i = 0; i < 10; ++i) draw.first_level[i] = env.bernoulli(i < 3 ? 0.9 : 0.1);
    const auto r = lexp::exp3m_round(s, hp, lexp::RewardTarget::FirstLevel, rng, draw);
    ASSERT_NEAR(r.probabilities.sum(), 4.0, 1e-9);
    s = r.next;
  }
}

TEST(Uniform, FullSetWhenLEqualsK) {
  Rng rng(35);
  EXPECT_EQ(lexp::uniform_select(4, 4, rng), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Uniform, MarginalsAndSubsetFrequencies) {
  Rng rng(36);
  constexpr int n = 100000;
  std::vector<double> marg(4, 0.0);
  std::map<std::vector<std::size_t>, int> subsets;
  for (int t = 0; t < n; ++t) {
    const auto s = lexp::uniform_select(4, 2, rng);
    for (std::size_t i : s) marg[i] += 1.0 / n;
    ++subsets[s];
  }
  for (double m : marg) EXPECT_NEAR(m, 0.5, 0.01);
  ASSERT_EQ(subsets.size(), 6u);
  for (const auto& [set, c] : subsets) EXPECT_NEAR(c / double(n), 1.0 / 6.0, 0.01);
}

// A uniform policy on heterogeneous arms keeps paying a constant per-round
// gap, so its regret grows linearly.
TEST(Uniform, LinearRegretOnHeterogeneousPool) {
  lexp::ArmPool pool;
  for (int i = 0; i < 10; ++i) {
    pool.mean_ctr.push_back(0.1 + 0.08 * i);
    pool.mean_revenue.push_back(0.9 - 0.08 * i);
  }
  lexp::ExperimentConfig c;
  c.algorithm = lexp::Algorithm::Uniform;
  c.select_count = 3;
  c.threshold = 1.0;
  c.horizon = 8000;
  c.checkpoint_interval = 2000;
  const auto r = lexp::run_replica(c, pool, {}, 0);
  ASSERT_TRUE(r.ok);
  const double early = r.trace[0].regret, late = r.trace.back().regret;
  EXPECT_GT(early, 0.0);
  EXPECT_NEAR(late / early, 4.0, 0.4);
}
