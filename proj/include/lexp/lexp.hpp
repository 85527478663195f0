#pragma once

// LExp: Lagrangian exponential weights for selecting L of K arms per round
// under a lower threshold h on the expected total first-level reward.
//
// Each round:
//   1. cap the largest weights so no marginal exceeds 1
//   2. mix capped weights with uniform exploration into marginals x~
//   3. draw L arms by dependent rounding
//   4. observe (a_i, b_i) on the selected arms
//   5. importance-weight the observations into estimates a^, g^
//   6. multiply uncapped weights by exp(zeta (g^ + lambda a^)) and take a
//      projected step on the multiplier lambda

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lexp/core.hpp"
#include "lexp/rounding.hpp"

namespace lexp {

struct LexpHyperparams {
  double gamma = 0.0;  // exploration rate
  double delta = 0.0;  // multiplier regularizer
  double zeta = 0.0;   // learning rate
  double beta = 0.0;   // capping ratio
  double threshold = 0.0;
  std::size_t select_count = 1;
  std::size_t arm_count = 1;

  /// Largest value the multiplier can reach, h / delta.
  double lambda_bound() const { return threshold / delta; }
};

struct LexpState {
  std::vector<double> weights;
  double lambda = 0.0;
  std::size_t round = 0;
  /// Factor the weights were divided by at the most recent update (1 when no
  /// rescale happened).
  double last_rescale = 1.0;
};

struct Capping {
  std::optional<double> alpha;     // empty when capping did not trigger
  std::vector<std::size_t> capped; // ascending arm indices
};

struct RewardEstimates {
  std::vector<double> first_level;  // a^
  std::vector<double> compound;     // g^
};

inline double capping_ratio(double gamma, std::size_t select_count, std::size_t arm_count) {
  const auto l = static_cast<double>(select_count);
  const auto k = static_cast<double>(arm_count);
  return (1.0 / l - gamma / k) / (1.0 - gamma);
}

inline double lexp_learning_rate(double gamma, double delta, std::size_t select_count,
                                 std::size_t arm_count) {
  const auto l = static_cast<double>(select_count);
  const auto k = static_cast<double>(arm_count);
  return gamma * delta * l / ((delta + l) * k);
}

/// Smallest delta admitted for a given gamma: 4(e-2) gamma L / (1-gamma) - L.
inline double min_delta(double gamma, std::size_t select_count) {
  const auto l = static_cast<double>(select_count);
  return 4.0 * (std::exp(1.0) - 2.0) * gamma * l / (1.0 - gamma) - l;
}

/// Default exploration / regularization for horizon T: T^(-1/3).
inline double default_rate(std::size_t horizon) {
  return std::cbrt(1.0 / static_cast<double>(horizon));
}

inline LexpHyperparams make_lexp_hyperparams(std::size_t arm_count, const ProblemSpec& spec,
                                             double gamma, double delta) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw Error(Errc::HyperparamViolation, "gamma must lie in (0,1)");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw Error(Errc::HyperparamViolation, "delta must be positive");
  if (spec.select_count < 1 || spec.select_count > arm_count)
    throw Error(Errc::DimensionMismatch, "select count must lie in [1, K]");
  if (!(spec.threshold >= 0.0) || !std::isfinite(spec.threshold))
    throw Error(Errc::HyperparamViolation, "threshold must be nonnegative");
  const double bound = min_delta(gamma, spec.select_count);
  if (delta < bound)
    throw Error(Errc::HyperparamViolation,
                "delta=" + std::to_string(delta) + " below required " + std::to_string(bound));

  LexpHyperparams hp;
  hp.gamma = gamma;
  hp.delta = delta;
  hp.threshold = spec.threshold;
  hp.select_count = spec.select_count;
  hp.arm_count = arm_count;
  hp.beta = capping_ratio(gamma, spec.select_count, arm_count);
  hp.zeta = lexp_learning_rate(gamma, delta, spec.select_count, arm_count);
  return hp;
}

inline LexpState make_lexp_state(std::size_t arm_count) {
  LexpState state;
  state.weights.assign(arm_count, 1.0);
  return state;
}

struct LexpInit {
  LexpState state;
  LexpHyperparams hp;
};

inline LexpInit init_lexp(std::size_t arm_count, const ProblemSpec& spec, double gamma,
                          double delta) {
  return {make_lexp_state(arm_count), make_lexp_hyperparams(arm_count, spec, gamma, delta)};
}

/// Finds alpha with alpha / (sum_{w >= alpha} alpha + sum_{w < alpha} w) = beta
/// when the largest weight reaches beta * sum(w).
///
/// Weights are ordered by (weight desc, index asc); for k = 1..K the candidate
/// alpha(k) = beta * S_k / (1 - k beta) with S_k the sum of the K-k smallest
/// weights is accepted when w_(k) >= alpha(k) > w_(k+1).
inline Capping compute_capping(const std::vector<double>& weights, double beta) {
  const std::size_t k = weights.size();
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double largest = *std::max_element(weights.begin(), weights.end());
  Capping out;
  if (largest < beta * total) return out;

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return weights[l] > weights[r]; });

  // Rounding in alpha(k) can push a valid window off by an ulp; accept a
  // relative slack of 1e-12 on both edges.
  constexpr double slack = 1e-12;
  double rest = total;
  for (std::size_t count = 1; count <= k; ++count) {
    rest -= weights[order[count - 1]];
    if (count == k) rest = 0.0;
    const double denom = 1.0 - static_cast<double>(count) * beta;
    if (denom <= 0.0) break;
    const double alpha = beta * std::max(rest, 0.0) / denom;
    const bool top_ok = weights[order[count - 1]] >= alpha * (1.0 - slack);
    const bool next_ok = count == k || weights[order[count]] < alpha * (1.0 + slack);
    if (top_ok && next_ok) {
      out.alpha = alpha;
      out.capped.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
      std::sort(out.capped.begin(), out.capped.end());
      return out;
    }
  }
  throw Error(Errc::CappingUnsolvable,
              "no consistent capping level for beta=" + std::to_string(beta));
}

/// x~_i = L[(1-gamma) w~_i / sum(w~) + gamma/K] with w~ the capped weights.
/// Capped arms get exactly 1, which the choice of beta guarantees
/// algebraically.
inline SelectionProbabilities compute_probabilities(const std::vector<double>& weights,
                                                    const Capping& capping,
                                                    const LexpHyperparams& hp) {
  const std::size_t k = weights.size();
  SelectionProbabilities x;
  x.probs.resize(k);
  if (hp.select_count == k) {
    x.probs.assign(k, 1.0);
    return x;
  }
  std::vector<double> capped_weights(weights);
  std::vector<bool> is_capped(k, false);
  for (std::size_t i : capping.capped) {
    capped_weights[i] = *capping.alpha;
    is_capped[i] = true;
  }
  const double total = std::accumulate(capped_weights.begin(), capped_weights.end(), 0.0);
  const auto l = static_cast<double>(hp.select_count);
  const double floor = hp.gamma / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    x.probs[i] = is_capped[i] ? 1.0
                              : std::min(1.0, l * ((1.0 - hp.gamma) * capped_weights[i] / total + floor));
  }
  return x;
}

/// Importance-weighted estimates; zero for arms that were not selected.
inline RewardEstimates estimate_rewards(const RoundObservation& obs,
                                        const SelectionProbabilities& x) {
  RewardEstimates est;
  est.first_level.assign(x.size(), 0.0);
  est.compound.assign(x.size(), 0.0);
  for (std::size_t n = 0; n < obs.selected.size(); ++n) {
    const std::size_t i = obs.selected[n];
    const double a = obs.first_level[n];
    const double b = obs.second_level[n];
    est.first_level[i] = a / x[i];
    est.compound[i] = a * b / x[i];
  }
  return est;
}

inline constexpr double kRescaleAbove = 1e100;

inline LexpState update_state(const LexpState& state, const RewardEstimates& est,
                              const SelectionProbabilities& x, const Capping& capping,
                              const LexpHyperparams& hp) {
  const std::size_t k = state.weights.size();
  LexpState next;
  next.weights = state.weights;
  next.round = state.round + 1;

  std::vector<bool> is_capped(k, false);
  for (std::size_t i : capping.capped) is_capped[i] = true;
  for (std::size_t i = 0; i < k; ++i) {
    if (is_capped[i]) continue;
    const double exponent = hp.zeta * (est.compound[i] + state.lambda * est.first_level[i]);
    if (exponent != 0.0) next.weights[i] *= std::exp(exponent);
  }

  double weighted_first = 0.0;
  for (std::size_t i = 0; i < k; ++i) weighted_first += est.first_level[i] * x[i];
  next.lambda = std::max(0.0, (1.0 - hp.delta * hp.zeta) * state.lambda -
                                  hp.zeta * (weighted_first / (1.0 - hp.gamma) - hp.threshold));

  const double largest = *std::max_element(next.weights.begin(), next.weights.end());
  if (!std::isfinite(largest))
    throw Error(Errc::NumericOverflow, "weight became non-finite at round " +
                                           std::to_string(next.round));
  if (largest > kRescaleAbove) {
    for (double& w : next.weights) w /= largest;
    next.last_rescale = largest;
  }
  for (double w : next.weights)
    if (!(w > 0.0))
      throw Error(Errc::NumericOverflow, "weight underflowed at round " +
                                             std::to_string(next.round));
  return next;
}

/// Rewards of all K arms for one round; the policy only reads selected ones.
struct RewardDraw {
  std::vector<double> first_level;
  std::vector<double> second_level;
};

inline RoundObservation observe(const std::vector<std::size_t>& selected, const RewardDraw& draw) {
  RoundObservation obs;
  obs.selected = selected;
  obs.first_level.reserve(selected.size());
  obs.second_level.reserve(selected.size());
  for (std::size_t i : selected) {
    obs.first_level.push_back(draw.first_level[i]);
    obs.second_level.push_back(draw.second_level[i]);
  }
  return obs;
}

struct LexpRound {
  RoundObservation observation;
  SelectionProbabilities probabilities;
  Capping capping;
  RewardEstimates estimates;
  LexpState next;
};

/// Capping and probabilities for the current weights. With L = K every arm
/// is selected with probability 1 and treated as capped.
inline std::pair<Capping, SelectionProbabilities> lexp_marginals(const LexpState& state,
                                                                 const LexpHyperparams& hp) {
  Capping capping;
  if (hp.select_count == state.weights.size()) {
    capping.alpha = *std::max_element(state.weights.begin(), state.weights.end());
    capping.capped.resize(state.weights.size());
    std::iota(capping.capped.begin(), capping.capped.end(), std::size_t{0});
  } else {
    capping = compute_capping(state.weights, hp.beta);
  }
  auto x = compute_probabilities(state.weights, capping, hp);
  return {std::move(capping), std::move(x)};
}

inline LexpRound lexp_round(const LexpState& state, const RewardDraw& draw,
                            const LexpHyperparams& hp, Rng& rng) {
  LexpRound r;
  std::tie(r.capping, r.probabilities) = lexp_marginals(state, hp);
  const auto selected = dependent_round(r.probabilities, hp.select_count, rng);
  r.observation = observe(selected, draw);
  r.estimates = estimate_rewards(r.observation, r.probabilities);
  r.next = update_state(state, r.estimates, r.probabilities, r.capping, hp);
  return r;
}

}  // namespace lexp
