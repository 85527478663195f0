#pragma once

// Exact solvers for
//     max g.x   s.t.  x in [0,1]^K,  sum x = L,  a.x >= h
// plus a vertex-enumeration cross-check and the integer (subset) version.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "lexp/core.hpp"

namespace lexp {

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
  double constraint_slack = 0.0;  // a.x - h
  double multiplier = 0.0;        // mu* >= 0
};

struct SubsetSolution {
  std::vector<std::size_t> selected;
  double objective = 0.0;
};

namespace detail {

inline void check_lp_input(const std::vector<double>& g, const std::vector<double>& a,
                           std::size_t count) {
  if (g.size() != a.size()) throw Error(Errc::DimensionMismatch, "g and a lengths differ");
  if (g.empty()) throw Error(Errc::EmptyInput, "no arms");
  if (count < 1 || count > g.size())
    throw Error(Errc::DimensionMismatch, "select count must lie in [1, K]");
}

inline void fill_solution(LpSolution& sol, const std::vector<double>& g,
                          const std::vector<double>& a, double threshold) {
  sol.objective = 0.0;
  double ax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    sol.objective += g[i] * sol.x[i];
    ax += a[i] * sol.x[i];
  }
  sol.constraint_slack = ax - threshold;
}

/// Top-`count` arms by score g + mu a. Ties: larger a first when
/// `prefer_high_a`, smaller a first otherwise, then lower index.
inline std::vector<std::size_t> top_by_score(const std::vector<double>& g,
                                             const std::vector<double>& a, double mu,
                                             std::size_t count, bool prefer_high_a = true) {
  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    const double sl = g[l] + mu * a[l];
    const double sr = g[r] + mu * a[r];
    if (sl != sr) return sl > sr;
    if (a[l] != a[r]) return prefer_high_a ? a[l] > a[r] : a[l] < a[r];
    return l < r;
  });
  order.resize(count);
  return order;
}

inline double sum_over(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (std::size_t i : idx) s += v[i];
  return s;
}

inline void require_feasible(const std::vector<double>& a, std::size_t count, double threshold) {
  const double best = top_sum(a, count);
  if (best < threshold)
    throw Error(Errc::Infeasible,
                "threshold " + std::to_string(threshold) + " exceeds achievable maximum " +
                    std::to_string(best),
                best);
}

}  // namespace detail

/// Parametric Lagrangian scan. For mu >= 0 the top-L set by g + mu a solves
/// the relaxed objective; the constraint value of that set is nondecreasing
/// in mu and piecewise constant between pairwise crossings
/// (g_i - g_j) / (a_j - a_i). The smallest breakpoint whose set satisfies the
/// constraint is found by binary search; at that breakpoint the tied arms are
/// swapped one pair at a time and the crossing pair is blended so that
/// sum a x = h holds exactly. At most two coordinates end up fractional.
inline LpSolution solve_constrained_lp(const std::vector<double>& g, const std::vector<double>& a,
                                       std::size_t count, double threshold) {
  detail::check_lp_input(g, a, count);
  detail::require_feasible(a, count, threshold);
  const std::size_t k = g.size();

  LpSolution sol;
  sol.x.assign(k, 0.0);
  const auto base = detail::top_by_score(g, a, 0.0, count);
  if (detail::sum_over(a, base) >= threshold) {
    for (std::size_t i : base) sol.x[i] = 1.0;
    detail::fill_solution(sol, g, a, threshold);
    return sol;
  }

  std::vector<double> breakpoints;
  breakpoints.reserve(k * (k - 1) / 2);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      if (a[i] == a[j]) continue;
      const double mu = (g[i] - g[j]) / (a[j] - a[i]);
      if (mu > 0.0 && std::isfinite(mu)) breakpoints.push_back(mu);
    }
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

  // Interval n is (bp[n-1], bp[n]) with bp[-1] = 0 and bp[B] = inf; the
  // top-L set is constant inside each interval, so evaluate at midpoints.
  const std::size_t intervals = breakpoints.size() + 1;
  const auto interior = [&](std::size_t n) {
    if (breakpoints.empty()) return 1.0;
    if (n == 0) return breakpoints.front() / 2.0;
    if (n == breakpoints.size()) return breakpoints.back() * 2.0 + 1.0;
    return 0.5 * (breakpoints[n - 1] + breakpoints[n]);
  };
  const auto set_in = [&](std::size_t n) {
    return detail::top_by_score(g, a, interior(n), count);
  };
  std::size_t lo = 0, hi = intervals - 1;  // last interval orders by a: feasible
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (detail::sum_over(a, set_in(mid)) >= threshold) hi = mid;
    else lo = mid + 1;
  }
  const std::size_t crossing = lo;
  const auto above = set_in(crossing);
  if (crossing == 0) {
    for (std::size_t i : above) sol.x[i] = 1.0;
    detail::fill_solution(sol, g, a, threshold);
    return sol;
  }
  sol.multiplier = breakpoints[crossing - 1];

  // Both neighbouring sets maximize g + mu a at the breakpoint, and so does
  // every set on the single-swap path between them.
  const auto below = set_in(crossing - 1);
  std::vector<bool> in_below(k, false), in_above(k, false);
  for (std::size_t i : below) in_below[i] = true;
  for (std::size_t i : above) in_above[i] = true;
  std::vector<std::size_t> entering, leaving;
  for (std::size_t i = 0; i < k; ++i) {
    if (in_above[i] && !in_below[i]) entering.push_back(i);
    if (in_below[i] && !in_above[i]) leaving.push_back(i);
  }
  std::sort(entering.begin(), entering.end(), [&](std::size_t l, std::size_t r) {
    return a[l] != a[r] ? a[l] > a[r] : l < r;
  });
  std::sort(leaving.begin(), leaving.end(), [&](std::size_t l, std::size_t r) {
    return a[l] != a[r] ? a[l] < a[r] : l < r;
  });

  std::vector<double> x(k, 0.0);
  for (std::size_t i : below) x[i] = 1.0;
  double current = detail::sum_over(a, below);
  for (std::size_t n = 0; n < entering.size() && n < leaving.size(); ++n) {
    const std::size_t in = entering[n];
    const std::size_t out = leaving[n];
    const double gain = a[in] - a[out];
    if (current + gain >= threshold) {
      const double theta = gain > 0.0 ? (threshold - current) / gain : 1.0;
      x[in] = std::clamp(theta, 0.0, 1.0);
      x[out] = 1.0 - x[in];
      current = threshold;
      break;
    }
    x[in] = 1.0;
    x[out] = 0.0;
    current += gain;
  }
  sol.x = std::move(x);
  detail::fill_solution(sol, g, a, threshold);
  return sol;
}

/// Enumerates every vertex of the feasible polytope: all 0/1 assignments
/// with up to two free coordinates, the free ones solved from sum x = L and
/// (for two free coordinates) a.x = h. K <= 8.
inline LpSolution brute_force_lp(const std::vector<double>& g, const std::vector<double>& a,
                                 std::size_t count, double threshold) {
  detail::check_lp_input(g, a, count);
  const std::size_t k = g.size();
  if (k > 8) throw Error(Errc::TooLarge, "vertex enumeration limited to K <= 8");
  constexpr double tol = 1e-12;

  bool found = false;
  LpSolution best;
  const auto consider = [&](const std::vector<double>& x) {
    double sx = 0.0, ax = 0.0, gx = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (x[i] < -tol || x[i] > 1.0 + tol) return;
      sx += x[i];
      ax += a[i] * x[i];
      gx += g[i] * x[i];
    }
    if (std::abs(sx - static_cast<double>(count)) > 1e-9) return;
    if (ax < threshold - 1e-9) return;
    if (!found || gx > best.objective) {
      found = true;
      best.x = x;
      best.objective = gx;
      best.constraint_slack = ax - threshold;
    }
  };

  // Free coordinate sets: none, one, or an unordered pair.
  std::vector<std::vector<std::size_t>> free_sets{{}};
  for (std::size_t f1 = 0; f1 < k; ++f1) {
    free_sets.push_back({f1});
    for (std::size_t f2 = f1 + 1; f2 < k; ++f2) free_sets.push_back({f1, f2});
  }

  std::vector<double> x(k);
  for (const auto& free : free_sets) {
    std::uint32_t free_mask = 0;
    for (std::size_t f : free) free_mask |= 1u << f;
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      if (mask & free_mask) continue;
      double fixed_sum = 0.0, fixed_a = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        x[i] = (mask >> i & 1u) ? 1.0 : 0.0;
        fixed_sum += x[i];
        fixed_a += a[i] * x[i];
      }
      const double rest = static_cast<double>(count) - fixed_sum;
      if (free.size() == 1) {
        x[free[0]] = rest;
      } else if (free.size() == 2) {
        const std::size_t f1 = free[0], f2 = free[1];
        const double da = a[f1] - a[f2];
        if (da == 0.0) continue;
        // x1 + x2 = rest,  a1 x1 + a2 x2 = h - fixed_a
        const double x1 = (threshold - fixed_a - a[f2] * rest) / da;
        x[f1] = x1;
        x[f2] = rest - x1;
      }
      consider(x);
    }
  }
  if (!found) throw Error(Errc::Infeasible, "no feasible vertex", top_sum(a, count));
  for (double& v : best.x) v = std::clamp(v, 0.0, 1.0);
  return best;
}

/// Best L-subset with sum a >= h by exhaustive enumeration (K <= 20).
inline SubsetSolution integer_knapsack_reference(const std::vector<double>& g,
                                                 const std::vector<double>& a, std::size_t count,
                                                 double threshold) {
  detail::check_lp_input(g, a, count);
  const std::size_t k = g.size();
  if (k > 20) throw Error(Errc::TooLarge, "subset enumeration limited to K <= 20");

  bool found = false;
  SubsetSolution best;
  std::vector<bool> pick(k, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(count), true);
  // prev_permutation over a sorted-descending mask visits all L-subsets in
  // lexicographic order of their index sets.
  do {
    double sg = 0.0, sa = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      if (pick[i]) {
        sg += g[i];
        sa += a[i];
      }
    if (sa >= threshold && (!found || sg > best.objective)) {
      found = true;
      best.objective = sg;
      best.selected.clear();
      for (std::size_t i = 0; i < k; ++i)
        if (pick[i]) best.selected.push_back(i);
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  if (!found) throw Error(Errc::Infeasible, "no L-subset meets the threshold");
  return best;
}

}  // namespace lexp
