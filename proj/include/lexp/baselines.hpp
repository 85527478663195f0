#pragma once

// Comparison policies: CUCB (top-L by upper confidence index), Exp3.M
// (unconstrained multiple-play exponential weights) and uniform selection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "lexp/core.hpp"
#include "lexp/lexp.hpp"
#include "lexp/rounding.hpp"

namespace lexp {

/// Which observed quantity a baseline optimizes: the first-level reward a
/// (the "-1" variants) or the compound reward a*b (the "-2" variants).
enum class RewardTarget { FirstLevel, Compound };

// ---------------------------------------------------------------------------
// CUCB
// ---------------------------------------------------------------------------

struct CucbState {
  std::vector<double> empirical_mean;
  std::vector<std::size_t> pull_count;
  std::size_t round = 0;  // rounds completed
};

inline CucbState make_cucb_state(std::size_t arm_count) {
  return {std::vector<double>(arm_count, 0.0), std::vector<std::size_t>(arm_count, 0), 0};
}

/// sqrt(3 ln t / (2 N)).
inline double cucb_bonus(std::size_t t, std::size_t pulls) {
  return std::sqrt(3.0 * std::log(static_cast<double>(t)) / (2.0 * static_cast<double>(pulls)));
}

inline double cucb_index(double mean, std::size_t t, std::size_t pulls) {
  return mean + cucb_bonus(t, pulls);
}

/// Number of round-robin rounds needed before every arm has one pull.
inline std::size_t cucb_warmup_rounds(std::size_t arm_count, std::size_t select_count) {
  return (arm_count + select_count - 1) / select_count;
}

/// Arms for round t = state.round + 1. The first ceil(K/L) rounds walk the
/// arms in blocks of L (wrapping to the lowest indices in the last block);
/// afterwards the L largest indices win, ties to the lower arm index.
inline std::vector<std::size_t> cucb_select(const CucbState& state, std::size_t select_count) {
  const std::size_t k = state.empirical_mean.size();
  const std::size_t t = state.round + 1;
  std::vector<std::size_t> chosen;
  if (t <= cucb_warmup_rounds(k, select_count)) {
    const std::size_t start = (t - 1) * select_count;
    for (std::size_t n = 0; n < select_count; ++n) chosen.push_back((start + n) % k);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }
  std::vector<double> index(k);
  for (std::size_t i = 0; i < k; ++i)
    index[i] = cucb_index(state.empirical_mean[i], t, state.pull_count[i]);
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return index[l] > index[r]; });
  chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(select_count));
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

inline CucbState cucb_update(const CucbState& state, const RoundObservation& obs,
                             RewardTarget target) {
  CucbState next = state;
  next.round = state.round + 1;
  for (std::size_t n = 0; n < obs.selected.size(); ++n) {
    const std::size_t i = obs.selected[n];
    const double sample = target == RewardTarget::FirstLevel
                              ? obs.first_level[n]
                              : obs.first_level[n] * obs.second_level[n];
    const std::size_t pulls = ++next.pull_count[i];
    next.empirical_mean[i] += (sample - next.empirical_mean[i]) / static_cast<double>(pulls);
  }
  return next;
}

// ---------------------------------------------------------------------------
// Exp3.M
// ---------------------------------------------------------------------------

struct Exp3mState {
  std::vector<double> weights;
  std::size_t round = 0;
};

/// Exp3.M runs the LExp machinery with the multiplier pinned at 0, learning
/// rate L*gamma/K and no threshold. delta only enters the (unused) multiplier
/// step and is set to 1.
inline LexpHyperparams make_exp3m_hyperparams(std::size_t arm_count, std::size_t select_count,
                                              double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw Error(Errc::HyperparamViolation, "gamma must lie in (0,1)");
  if (select_count < 1 || select_count > arm_count)
    throw Error(Errc::DimensionMismatch, "select count must lie in [1, K]");
  LexpHyperparams hp;
  hp.gamma = gamma;
  hp.delta = 1.0;
  hp.threshold = 0.0;
  hp.select_count = select_count;
  hp.arm_count = arm_count;
  hp.beta = capping_ratio(gamma, select_count, arm_count);
  hp.zeta = static_cast<double>(select_count) * gamma / static_cast<double>(arm_count);
  return hp;
}

inline Exp3mState make_exp3m_state(std::size_t arm_count) {
  return {std::vector<double>(arm_count, 1.0), 0};
}

struct Exp3mRound {
  RoundObservation observation;
  SelectionProbabilities probabilities;
  Capping capping;
  Exp3mState next;
};

inline Exp3mRound exp3m_round(const Exp3mState& state, const LexpHyperparams& hp,
                              RewardTarget target, Rng& rng, const RewardDraw& draw) {
  LexpState inner;
  inner.weights = state.weights;
  inner.round = state.round;
  Exp3mRound r;
  std::tie(r.capping, r.probabilities) = lexp_marginals(inner, hp);
  const auto selected = dependent_round(r.probabilities, hp.select_count, rng);
  r.observation = observe(selected, draw);
  RewardEstimates est = estimate_rewards(r.observation, r.probabilities);
  // The weight step reads only g^ (lambda is 0), so feed it the target.
  if (target == RewardTarget::FirstLevel) est.compound = est.first_level;
  std::fill(est.first_level.begin(), est.first_level.end(), 0.0);
  const LexpState updated = update_state(inner, est, r.probabilities, r.capping, hp);
  r.next.weights = updated.weights;
  r.next.round = updated.round;
  return r;
}

// ---------------------------------------------------------------------------
// Uniform
// ---------------------------------------------------------------------------

/// Uniformly random L-subset (partial Fisher-Yates), ascending.
inline std::vector<std::size_t> uniform_select(std::size_t arm_count, std::size_t select_count,
                                               Rng& rng) {
  std::vector<std::size_t> idx(arm_count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t n = 0; n < select_count; ++n) {
    const auto pick = n + static_cast<std::size_t>(rng.uniform_int(arm_count - n));
    std::swap(idx[n], idx[pick]);
  }
  idx.resize(select_count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace lexp
