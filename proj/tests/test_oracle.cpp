#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lexp/oracle.hpp"

using lexp::Errc;
using lexp::Error;
using lexp::Rng;

namespace {

const std::vector<double> kG{0.9, 0.8, 0.1};
const std::vector<double> kA{1.0, 0.1, 0.9};

struct Instance {
  std::vector<double> g, a;
  std::size_t count;
  double threshold;
};

Instance random_instance(Rng& rng, std::size_t max_k, std::size_t max_l) {
  Instance in;
  const std::size_t k = 1 + rng.uniform_int(max_k);
  in.count = 1 + rng.uniform_int(std::min(k, max_l));
  in.g.resize(k);
  in.a.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    in.g[i] = rng.uniform01();
    in.a[i] = rng.uniform01();
  }
  in.threshold = rng.uniform01() * lexp::top_sum(in.a, in.count);
  return in;
}

void expect_valid(const lexp::LpSolution& s, const Instance& in) {
  double sx = 0.0;
  int fractional = 0;
  for (double v : s.x) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    sx += v;
    fractional += v > 1e-9 && v < 1.0 - 1e-9;
  }
  EXPECT_NEAR(sx, static_cast<double>(in.count), 1e-9);
  EXPECT_GE(s.constraint_slack, -1e-9);
  EXPECT_LE(fractional, 2);
  EXPECT_GE(s.multiplier, 0.0);
}

}  // namespace

TEST(ConstrainedLp, InactiveConstraint) {
  const auto s = lexp::solve_constrained_lp(kG, kA, 2, 0.0);
  EXPECT_EQ(s.x, (std::vector<double>{1.0, 1.0, 0.0}));
  EXPECT_NEAR(s.objective, 1.7, 1e-12);
  EXPECT_EQ(s.multiplier, 0.0);
}

TEST(ConstrainedLp, TightConstraintBlendsPair) {
  const auto s = lexp::solve_constrained_lp(kG, kA, 2, 1.5);
  ASSERT_EQ(s.x.size(), 3u);
  EXPECT_NEAR(s.x[0], 1.0, 1e-12);
  EXPECT_NEAR(s.x[1], 0.5, 1e-12);
  EXPECT_NEAR(s.x[2], 0.5, 1e-12);
  EXPECT_NEAR(s.objective, 1.35, 1e-12);
  EXPECT_NEAR(s.constraint_slack, 0.0, 1e-12);
  EXPECT_GT(s.multiplier, 0.0);
}

TEST(ConstrainedLp, InfeasibleReportsMaximum) {
  try {
    lexp::solve_constrained_lp(kG, kG, 2, 1.8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Infeasible);
    EXPECT_NEAR(e.value(), 1.7, 1e-12);
  }
}

TEST(ConstrainedLp, RejectsBadShapes) {
  EXPECT_THROW(lexp::solve_constrained_lp({0.1, 0.2}, {0.1}, 1, 0.0), Error);
  EXPECT_THROW(lexp::solve_constrained_lp({0.1, 0.2}, {0.1, 0.2}, 3, 0.0), Error);
}

TEST(BruteForceLp, Examples) {
  EXPECT_NEAR(lexp::brute_force_lp(kG, kA, 2, 1.5).objective, 1.35, 1e-12);
  const auto forced = lexp::brute_force_lp({0.3, 0.4}, {0.5, 0.6}, 2, 1.0);
  EXPECT_EQ(forced.x, (std::vector<double>{1.0, 1.0}));
  EXPECT_THROW(lexp::brute_force_lp({0.3, 0.4}, {0.5, 0.6}, 2, 1.2), Error);
  EXPECT_NEAR(lexp::brute_force_lp({0.5, 0.5, 0.5}, {0.2, 0.3, 0.4}, 1, 0.0).objective, 0.5, 1e-12);
  EXPECT_THROW(lexp::brute_force_lp(std::vector<double>(9, 0.1), std::vector<double>(9, 0.1), 1, 0.0),
               Error);
}

TEST(IntegerReference, Examples) {
  const auto s = lexp::integer_knapsack_reference(kG, kA, 2, 1.5);
  EXPECT_EQ(s.selected, (std::vector<std::size_t>{0, 2}));
  EXPECT_NEAR(s.objective, 1.0, 1e-12);
  EXPECT_EQ(lexp::integer_knapsack_reference(kG, kA, 2, 0.0).selected,
            (std::vector<std::size_t>{0, 1}));
  try {
    lexp::integer_knapsack_reference(kG, kA, 1, 1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Infeasible);
  }
}

TEST(ConstrainedLp, MatchesVertexEnumerationProperty) {
  Rng rng(61);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_instance(rng, 6, 3);
    const auto fast = lexp::solve_constrained_lp(in.g, in.a, in.count, in.threshold);
    const auto slow = lexp::brute_force_lp(in.g, in.a, in.count, in.threshold);
    ASSERT_NEAR(fast.objective, slow.objective, 1e-9) << "trial " << trial;
    expect_valid(fast, in);
  }
}

TEST(ConstrainedLp, DominatesIntegerOptimum) {
  Rng rng(62);
  for (int trial = 0; trial < 500; ++trial) {
    const auto in = random_instance(rng, 10, 5);
    SCOPED_TRACE(trial);
    lexp::SubsetSolution best;
    try {
      best = lexp::integer_knapsack_reference(in.g, in.a, in.count, in.threshold);
    } catch (const Error&) {
      continue;
    }
    EXPECT_GE(lexp::solve_constrained_lp(in.g, in.a, in.count, in.threshold).objective,
              best.objective - 1e-12);
  }
}

TEST(ConstrainedLp, ComplementarySlackness) {
  Rng rng(63);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_instance(rng, 12, 6);
    const auto s = lexp::solve_constrained_lp(in.g, in.a, in.count, in.threshold);
    if (s.multiplier > 0.0) {
      ASSERT_LE(std::abs(s.constraint_slack), 1e-9) << "trial " << trial;
    }
  }
}

TEST(ConstrainedLp, ScaleEquivariance) {
  Rng rng(64);
  for (int trial = 0; trial < 300; ++trial) {
    const auto in = random_instance(rng, 12, 6);
    const double c = rng.uniform(0.1, 10.0);
    auto scaled = in.g;
    for (double& v : scaled) v *= c;
    const auto s = lexp::solve_constrained_lp(in.g, in.a, in.count, in.threshold);
    const auto t = lexp::solve_constrained_lp(scaled, in.a, in.count, in.threshold);
    EXPECT_NEAR(t.objective, c * s.objective, 1e-9 * std::max(1.0, c));
    for (std::size_t i = 0; i < s.x.size(); ++i) EXPECT_NEAR(t.x[i], s.x[i], 1e-9);
  }
}
