#pragma once

// Cumulative reward, regret and violation accounting, plus the Pearson
// correlation used to check independence of the two reward levels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lexp/core.hpp"
#include "lexp/oracle.hpp"

namespace lexp {

struct TraceRecord {
  std::size_t t = 0;
  double cum_first = 0.0;
  double cum_compound = 0.0;
  double regret = 0.0;
  double violation_perround = 0.0;
  double violation_eq4 = 0.0;
  double lambda = 0.0;
};

/// Running totals for one replica.
///
/// cum_first / cum_compound sum realized a and a*b over the selected arms.
/// The per-round violation adds (h - sum_{i in I_t} a_i)_+ each round using
/// the true means a_i; the aggregate variant clamps once at the end:
/// (sum_t (h - sum_{i in I_t} a_i))_+. The per-arm realized compound sums
/// feed the regret benchmark.
class Accumulator {
 public:
  Accumulator(std::vector<double> true_first, double threshold)
      : true_first_(std::move(true_first)),
        threshold_(threshold),
        compound_sums_(true_first_.size(), 0.0) {}

  void record(std::span<const std::size_t> selected, std::span<const double> first_level,
              std::span<const double> second_level) {
    ++rounds_;
    double mean_sum = 0.0;
    for (std::size_t i : selected) {
      cum_first_ += first_level[i];
      cum_compound_ += first_level[i] * second_level[i];
      mean_sum += true_first_[i];
    }
    for (std::size_t i = 0; i < compound_sums_.size(); ++i)
      compound_sums_[i] += first_level[i] * second_level[i];
    const double shortfall = threshold_ - mean_sum;
    if (shortfall > 0.0) violation_perround_ += shortfall;
    shortfall_total_ += shortfall;
  }

  std::size_t rounds() const noexcept { return rounds_; }
  double cum_first() const noexcept { return cum_first_; }
  double cum_compound() const noexcept { return cum_compound_; }
  double violation_perround() const noexcept { return violation_perround_; }
  double violation_eq4() const noexcept { return shortfall_total_ > 0.0 ? shortfall_total_ : 0.0; }
  const std::vector<double>& compound_sums() const noexcept { return compound_sums_; }

 private:
  std::vector<double> true_first_;
  double threshold_;
  std::vector<double> compound_sums_;
  std::size_t rounds_ = 0;
  double cum_first_ = 0.0;
  double cum_compound_ = 0.0;
  double violation_perround_ = 0.0;
  double shortfall_total_ = 0.0;
};

struct CumulativeRewards {
  double first = 0.0;
  double compound = 0.0;
};

/// Sums of a and a*b over the selected arms of each round. `first_draws` and
/// `compound_draws` hold one entry per selected arm, aligned with `selected`.
struct RoundRecord {
  std::vector<std::size_t> selected;
  std::vector<double> first_draws;
  std::vector<double> compound_draws;
};

inline CumulativeRewards accumulate(std::span<const RoundRecord> history) {
  CumulativeRewards out;
  for (const auto& r : history) {
    for (double v : r.first_draws) out.first += v;
    for (double v : r.compound_draws) out.compound += v;
  }
  return out;
}

/// Oracle value on the realized per-arm compound sums minus what the policy
/// collected. The oracle is re-solved for the given sums.
inline double regret_at(const std::vector<double>& compound_sums,
                        const std::vector<double>& true_first, std::size_t count,
                        double threshold, double cum_compound) {
  return solve_constrained_lp(compound_sums, true_first, count, threshold).objective - cum_compound;
}

/// Running sum of per-round positive shortfalls below h.
inline double violation_at(std::span<const double> round_first_sums, double threshold) {
  double v = 0.0;
  for (double s : round_first_sums)
    if (threshold > s) v += threshold - s;
  return v;
}

/// Shortfall clamped once over the whole history.
inline double violation_clamped_total(std::span<const double> round_first_sums, double threshold) {
  double v = 0.0;
  for (double s : round_first_sums) v += threshold - s;
  return v > 0.0 ? v : 0.0;
}

inline double pearson_correlation(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(Errc::DimensionMismatch, "vectors differ in length");
  if (u.size() < 2) throw Error(Errc::EmptyInput, "need at least two points");
  const auto n = static_cast<double>(u.size());
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double suv = 0.0, suu = 0.0, svv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double du = u[i] - mu;
    const double dv = v[i] - mv;
    suv += du * dv;
    suu += du * du;
    svv += dv * dv;
  }
  if (suu == 0.0 || svv == 0.0) throw Error(Errc::DegenerateVariance, "zero variance");
  return std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
}

}  // namespace lexp
