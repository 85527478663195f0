#pragma once

// Reward generators: Bernoulli first-level rewards, triangle-wave drifting
// second-level rewards, and nested (n-level) revenue built from a child pool.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lexp/core.hpp"
#include "lexp/lexp.hpp"

namespace lexp {

/// Independent Bernoulli(a_i) realization per arm.
inline std::vector<double> draw_first_level(const ArmPool& pool, Rng& rng) {
  std::vector<double> out(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) out[i] = rng.bernoulli(pool.mean_ctr[i]) ? 1.0 : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Drift
// ---------------------------------------------------------------------------

/// Second-level rewards moving linearly between 0 and each arm's mean,
/// reversing at either end.
struct DriftingRevenueState {
  std::vector<double> current;
  std::vector<int> direction;  // +1 or -1
  double rate = 0.0;
  std::vector<double> ceiling;
};

inline DriftingRevenueState init_drift(const ArmPool& pool, std::size_t horizon, Rng& rng) {
  if (horizon < 1) throw Error(Errc::Config, "horizon must be at least 1");
  DriftingRevenueState s;
  s.rate = 10.0 / static_cast<double>(horizon);
  s.ceiling = pool.mean_revenue;
  s.current.resize(pool.size());
  s.direction.resize(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    s.current[i] = s.ceiling[i] > 0.0 ? rng.uniform(0.0, s.ceiling[i]) : 0.0;
    s.direction[i] = rng.bernoulli(0.5) ? +1 : -1;
  }
  return s;
}

/// Advances one coordinate: a boundary-parked value turns around first, then
/// moves by rate and clamps; reaching a boundary flips the direction.
inline void advance_drift(double& value, int& direction, double rate, double ceiling) {
  if (ceiling <= 0.0) {
    value = 0.0;
    return;
  }
  if (direction > 0 && value >= ceiling) direction = -1;
  else if (direction < 0 && value <= 0.0) direction = +1;
  value += static_cast<double>(direction) * rate;
  // Snap values within rounding distance of a boundary so repeated steps of
  // an exact divisor of the ceiling land on the boundary.
  constexpr double snap = 1e-12;
  if (value >= ceiling - snap) {
    value = ceiling;
    direction = -1;
  } else if (value <= snap) {
    value = 0.0;
    direction = +1;
  }
}

/// Emits the values for this round, then advances the state in place.
inline std::vector<double> step_drift(DriftingRevenueState& state) {
  std::vector<double> emitted = state.current;
  for (std::size_t i = 0; i < state.current.size(); ++i)
    advance_drift(state.current[i], state.direction[i], state.rate, state.ceiling[i]);
  return emitted;
}

// ---------------------------------------------------------------------------
// Nested levels
// ---------------------------------------------------------------------------

/// One pseudo homepage frame: a pool of child links, how many of them are
/// shown, and the frame's own threshold. A non-empty `children` vector (one
/// entry per child arm) makes each child's revenue itself nested.
struct NestedLevelSpec {
  ArmPool pool;
  std::size_t select_count = 1;
  double threshold = 0.0;
  std::vector<NestedLevelSpec> children;
};

using ChildSelector = std::function<std::vector<std::size_t>(const NestedLevelSpec&, Rng&)>;

/// Fixed choice: the L' children with the largest a'*b' (ties to lower index).
inline std::vector<std::size_t> top_children_by_compound(const NestedLevelSpec& spec, Rng&) {
  const auto g = spec.pool.mean_compound();
  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return g[l] > g[r]; });
  order.resize(spec.select_count);
  std::sort(order.begin(), order.end());
  return order;
}

inline void validate_nested(const NestedLevelSpec& spec) {
  validate_pool(spec.pool);
  if (spec.select_count < 1 || spec.pool.size() < spec.select_count)
    throw Error(Errc::ChildPoolTooSmall,
                "child pool of " + std::to_string(spec.pool.size()) + " cannot show " +
                    std::to_string(spec.select_count) + " links");
  if (!spec.children.empty()) {
    if (spec.children.size() != spec.pool.size())
      throw Error(Errc::DimensionMismatch, "nested children must match the child pool size");
    for (const auto& child : spec.children) validate_nested(child);
  }
}

/// Revenue composed from realized child rewards: sum_j a'_j b'_j / L'.
/// Dividing by L' keeps the result in [0,1].
inline double compose_revenue(std::span<const double> child_first,
                              std::span<const double> child_second) {
  if (child_first.size() != child_second.size())
    throw Error(Errc::DimensionMismatch, "child reward vectors differ in length");
  if (child_first.empty()) throw Error(Errc::ChildPoolTooSmall, "no children selected");
  double sum = 0.0;
  for (std::size_t j = 0; j < child_first.size(); ++j) sum += child_first[j] * child_second[j];
  return sum / static_cast<double>(child_first.size());
}

/// One realization of a nested revenue: select children, draw Bernoulli
/// first-level rewards for them, take each child's second-level reward from
/// its mean or from a deeper nested level, and compose.
inline double nested_revenue(const NestedLevelSpec& spec, Rng& rng,
                             const ChildSelector& selector = top_children_by_compound) {
  if (spec.select_count < 1 || spec.pool.size() < spec.select_count)
    throw Error(Errc::ChildPoolTooSmall,
                "child pool of " + std::to_string(spec.pool.size()) + " cannot show " +
                    std::to_string(spec.select_count) + " links");
  const auto chosen = selector(spec, rng);
  if (chosen.size() != spec.select_count)
    throw Error(Errc::DimensionMismatch, "child selector returned the wrong number of links");
  std::vector<double> first(chosen.size());
  std::vector<double> second(chosen.size());
  for (std::size_t n = 0; n < chosen.size(); ++n) {
    const std::size_t j = chosen[n];
    first[n] = rng.bernoulli(spec.pool.mean_ctr[j]) ? 1.0 : 0.0;
    second[n] = spec.children.empty() ? spec.pool.mean_revenue[j]
                                      : nested_revenue(spec.children[j], rng, selector);
  }
  return compose_revenue(first, second);
}

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

enum class RevenueMode { Stationary, Drifting };

/// Per-replica reward source. First- and second-level rewards come from
/// separate generators so the two levels are independent.
class Environment {
 public:
  Environment(ArmPool pool, std::size_t horizon, RevenueMode mode, std::uint64_t seed,
              std::vector<std::optional<NestedLevelSpec>> nested = {})
      : pool_(std::move(pool)),
        mode_(mode),
        first_rng_(Rng::derive(seed, 1)),
        second_rng_(Rng::derive(seed, 2)),
        nested_(std::move(nested)) {
    validate_pool(pool_);
    if (!nested_.empty() && nested_.size() != pool_.size())
      throw Error(Errc::DimensionMismatch, "nested specs must be given per arm");
    for (const auto& n : nested_)
      if (n) validate_nested(*n);
    if (mode_ == RevenueMode::Drifting) drift_ = init_drift(pool_, horizon, second_rng_);
  }

  const ArmPool& pool() const noexcept { return pool_; }

  RewardDraw draw() {
    RewardDraw d;
    d.first_level = draw_first_level(pool_, first_rng_);
    if (mode_ == RevenueMode::Drifting) d.second_level = step_drift(*drift_);
    else d.second_level = pool_.mean_revenue;
    for (std::size_t i = 0; i < nested_.size(); ++i)
      if (nested_[i]) d.second_level[i] = nested_revenue(*nested_[i], second_rng_);
    return d;
  }

 private:
  ArmPool pool_;
  RevenueMode mode_;
  Rng first_rng_;
  Rng second_rng_;
  std::optional<DriftingRevenueState> drift_;
  std::vector<std::optional<NestedLevelSpec>> nested_;
};

}  // namespace lexp
