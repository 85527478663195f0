#pragma once

// Dependent rounding: turns marginals x in [0,1]^K with sum L into a random
// set of exactly L arms such that Pr[i selected] = x_i.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lexp/core.hpp"

namespace lexp {

inline constexpr double kSnapTolerance = 1e-12;
inline constexpr double kSumTolerance = 1e-9;

/// Called with the working vector after every pair step.
using RoundingObserver = std::function<void(const std::vector<double>&)>;

struct RoundingResult {
  std::vector<std::size_t> selected;  // ascending
  std::size_t pair_steps = 0;
};

namespace detail {

inline bool is_fractional(double v) { return v > 0.0 && v < 1.0; }

inline void check_rounding_input(std::span<const double> x, std::size_t count) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= -kSnapTolerance && x[i] <= 1.0 + kSnapTolerance))
      throw Error(Errc::MalformedVector,
                  "entry " + std::to_string(i) + " = " + std::to_string(x[i]) + " outside [0,1]");
    sum += x[i];
  }
  if (std::abs(sum - static_cast<double>(count)) > kSumTolerance)
    throw Error(Errc::MalformedVector,
                "entries sum to " + std::to_string(sum) + ", expected " + std::to_string(count));
}

}  // namespace detail

/// Rounds `x` in place. Pairs of fractional entries are taken left to right:
/// cursor `i` holds the leftmost surviving fractional entry and `j` scans
/// ahead for the next one. Each pair step makes at least one of the two
/// entries integral, so at most K-1 steps run. One uniform draw per step.
inline RoundingResult dependent_round_in_place(std::vector<double>& x, std::size_t count,
                                               Rng& rng, const RoundingObserver& observe = {}) {
  detail::check_rounding_input(x, count);
  for (double& v : x) {
    if (v <= kSnapTolerance) v = 0.0;
    else if (v >= 1.0 - kSnapTolerance) v = 1.0;
  }

  RoundingResult result;
  const std::size_t k = x.size();
  std::size_t i = 0;
  while (i < k && !detail::is_fractional(x[i])) ++i;
  std::size_t j = i + 1;
  while (i < k) {
    while (j < k && !detail::is_fractional(x[j])) ++j;
    if (j >= k) break;

    const double xi = x[i];
    const double xj = x[j];
    const double p = std::min(1.0 - xi, xj);
    const double q = std::min(xi, 1.0 - xj);
    const double total = xi + xj;
    // (xi + p, xj - p) with prob q/(p+q); (xi - q, xj + q) otherwise.
    // Whichever coordinate hits a bound is set exactly; the other takes the
    // remainder so the pair sum is conserved.
    if (rng.uniform01() * (p + q) < q) {
      if (p == 1.0 - xi) {
        x[i] = 1.0;
        x[j] = total - 1.0;
      } else {
        x[j] = 0.0;
        x[i] = total;
      }
    } else {
      if (q == xi) {
        x[i] = 0.0;
        x[j] = total;
      } else {
        x[j] = 1.0;
        x[i] = total - 1.0;
      }
    }
    for (std::size_t idx : {i, j}) {
      if (x[idx] <= kSnapTolerance) x[idx] = 0.0;
      else if (x[idx] >= 1.0 - kSnapTolerance) x[idx] = 1.0;
    }
    ++result.pair_steps;
    if (observe) observe(x);

    if (!detail::is_fractional(x[i])) {
      // j may still be fractional; it becomes the new left cursor.
      i = j;
      while (i < k && !detail::is_fractional(x[i])) ++i;
      j = i + 1;
    } else {
      ++j;
    }
  }

  // A lone fractional survivor can only come from accumulated floating-point
  // drift. Residues within the input sum tolerance are snapped; anything
  // larger means the marginals did not sum to an integer.
  for (std::size_t idx = 0; idx < k; ++idx) {
    if (!detail::is_fractional(x[idx])) continue;
    if (x[idx] <= kSumTolerance) x[idx] = 0.0;
    else if (x[idx] >= 1.0 - kSumTolerance) x[idx] = 1.0;
    else
      throw Error(Errc::MalformedVector,
                  "unpaired fractional entry " + std::to_string(idx) + " = " +
                      std::to_string(x[idx]));
  }

  for (std::size_t idx = 0; idx < k; ++idx)
    if (x[idx] == 1.0) result.selected.push_back(idx);
  if (result.selected.size() != count)
    throw Error(Errc::MalformedVector,
                "rounding produced " + std::to_string(result.selected.size()) +
                    " arms, expected " + std::to_string(count));
  return result;
}

inline RoundingResult dependent_round_detailed(const SelectionProbabilities& x, std::size_t count,
                                               Rng& rng) {
  std::vector<double> work(x.probs);
  return dependent_round_in_place(work, count, rng);
}

/// Selected arm indices, ascending.
inline std::vector<std::size_t> dependent_round(const SelectionProbabilities& x,
                                                std::size_t count, Rng& rng) {
  return dependent_round_detailed(x, count, rng).selected;
}

}  // namespace lexp
