#pragma once

// Shared domain types for the constrained multiple-play bandit: the arm pool,
// problem parameters, per-round observations, the error type and the seeded
// random number source every stochastic component draws from.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lexp {

enum class Errc {
  DimensionMismatch,
  InfeasibleThreshold,
  MalformedVector,
  HyperparamViolation,
  CappingUnsolvable,
  NumericOverflow,
  Infeasible,
  TooLarge,
  ChildPoolTooSmall,
  DegenerateVariance,
  DegenerateRange,
  EmptyInput,
  Parse,
  Config,
  Io,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InfeasibleThreshold: return "InfeasibleThreshold";
    case Errc::MalformedVector: return "MalformedVector";
    case Errc::HyperparamViolation: return "HyperparamViolation";
    case Errc::CappingUnsolvable: return "CappingUnsolvable";
    case Errc::NumericOverflow: return "NumericOverflow";
    case Errc::Infeasible: return "Infeasible";
    case Errc::TooLarge: return "TooLarge";
    case Errc::ChildPoolTooSmall: return "ChildPoolTooSmall";
    case Errc::DegenerateVariance: return "DegenerateVariance";
    case Errc::DegenerateRange: return "DegenerateRange";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::Parse: return "Parse";
    case Errc::Config: return "Config";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code. `value()` holds a numeric
/// payload where one is meaningful (the achievable maximum for infeasible
/// thresholds); NaN otherwise.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what,
        double value = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        value_(value) {}

  Errc code() const noexcept { return code_; }
  double value() const noexcept { return value_; }

 private:
  Errc code_;
  double value_;
};

// ---------------------------------------------------------------------------
// Randomness
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random source.
///
/// Engine: std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard's distributions are implementation-defined, so all
/// derived draws are computed here from raw 64-bit outputs:
///   uniform01   = (bits >> 11) * 2^-53           in [0, 1)
///   bernoulli   = uniform01 < p
///   uniform_int = Lemire's multiply-shift with rejection
/// Seeds are passed through splitmix64 before seeding the engine. `derive`
/// produces an independent stream keyed by (seed, stream id).
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(seed ^ splitmix64(stream + 0x5851f42d4c957f2dULL)));
  }

  std::uint64_t next() { return engine_(); }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // UniformRandomBitGenerator surface.
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return next(); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// True mean first-level rewards (click-through rates) and mean second-level
/// rewards (revenue) of the K arms.
struct ArmPool {
  std::vector<double> mean_ctr;
  std::vector<double> mean_revenue;

  std::size_t size() const noexcept { return mean_ctr.size(); }

  /// Expected compound reward a_i * b_i per arm.
  std::vector<double> mean_compound() const {
    std::vector<double> g(size());
    for (std::size_t i = 0; i < size(); ++i) g[i] = mean_ctr[i] * mean_revenue[i];
    return g;
  }
};

inline void validate_pool(const ArmPool& pool) {
  if (pool.mean_ctr.empty())
    throw Error(Errc::EmptyInput, "arm pool has no arms");
  if (pool.mean_ctr.size() != pool.mean_revenue.size())
    throw Error(Errc::DimensionMismatch, "mean_ctr and mean_revenue lengths differ");
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double a = pool.mean_ctr[i];
    const double b = pool.mean_revenue[i];
    if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0))
      throw Error(Errc::MalformedVector,
                  "arm " + std::to_string(i) + " has a mean outside [0,1]");
  }
}

struct ProblemSpec {
  std::size_t select_count = 1;  // L
  double threshold = 0.0;        // h
  std::size_t horizon = 1;       // T
};

/// Marginal selection probabilities x~ for one round.
struct SelectionProbabilities {
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
  double sum() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }
};

/// Selected arms and the rewards observed on them, in selection order.
struct RoundObservation {
  std::vector<std::size_t> selected;
  std::vector<double> first_level;   // a_i^t, aligned with `selected`
  std::vector<double> second_level;  // b_i^t, aligned with `selected`
};

/// Sum of the `count` largest entries.
inline double top_sum(const std::vector<double>& values, std::size_t count) {
  std::vector<double> sorted(values);
  count = std::min(count, sorted.size());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(count),
                    sorted.end(), std::greater<>());
  return std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(count), 0.0);
}

/// Feasibility of the relaxed problem: the largest achievable sum_i a_i x_i
/// over x in [0,1]^K with sum x = L is the sum of the L largest a_i.
inline void validate_problem(const ArmPool& pool, const ProblemSpec& spec) {
  validate_pool(pool);
  if (spec.select_count < 1 || spec.select_count > pool.size())
    throw Error(Errc::DimensionMismatch,
                "select count L=" + std::to_string(spec.select_count) +
                    " must lie in [1, K=" + std::to_string(pool.size()) + "]");
  if (!(spec.threshold > 0.0) || !std::isfinite(spec.threshold))
    throw Error(Errc::Config, "threshold h must be positive and finite");
  if (spec.horizon < 1) throw Error(Errc::Config, "horizon T must be at least 1");
  const double best = top_sum(pool.mean_ctr, spec.select_count);
  if (best < spec.threshold)
    throw Error(Errc::InfeasibleThreshold,
                "threshold " + std::to_string(spec.threshold) +
                    " exceeds achievable maximum " + std::to_string(best),
                best);
}

// ---------------------------------------------------------------------------
// Arm-pool CSV: arm_id,mean_ctr,mean_revenue
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline double parse_double(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw Error(Errc::Parse, where + ": not a number: '" + t + "'");
  }
  if (used != t.size()) throw Error(Errc::Parse, where + ": not a number: '" + t + "'");
  return v;
}

inline long long parse_integer(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw Error(Errc::Parse, where + ": not an integer: '" + t + "'");
  }
  if (used != t.size()) throw Error(Errc::Parse, where + ": not an integer: '" + t + "'");
  return v;
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

inline ArmPool parse_arm_pool(std::istream& in, const std::string& source = "<arms>") {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::EmptyInput, source + ": empty file");
  detail::strip_cr(line);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
  if (detail::trim(line) != "arm_id,mean_ctr,mean_revenue")
    throw Error(Errc::Parse, source + ":1: expected header 'arm_id,mean_ctr,mean_revenue'");

  ArmPool pool;
  std::vector<long long> ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (detail::trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 3) throw Error(Errc::Parse, where + ": expected 3 fields");
    const long long id = detail::parse_integer(fields[0], where);
    if (id < 0) throw Error(Errc::Parse, where + ": arm_id must be nonnegative");
    if (std::find(ids.begin(), ids.end(), id) != ids.end())
      throw Error(Errc::Parse, where + ": duplicate arm_id " + std::to_string(id));
    ids.push_back(id);
    const double a = detail::parse_double(fields[1], where);
    const double b = detail::parse_double(fields[2], where);
    if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0))
      throw Error(Errc::Parse, where + ": means must lie in [0,1]");
    pool.mean_ctr.push_back(a);
    pool.mean_revenue.push_back(b);
  }
  if (pool.size() == 0) throw Error(Errc::EmptyInput, source + ": no arms");
  return pool;
}

inline ArmPool load_arm_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open arm pool '" + path + "'");
  return parse_arm_pool(in, path);
}

inline void write_arm_pool(std::ostream& out, const ArmPool& pool) {
  out << "arm_id,mean_ctr,mean_revenue\n";
  char buf[64];
  for (std::size_t i = 0; i < pool.size(); ++i) {
    out << i << ',';
    std::snprintf(buf, sizeof buf, "%.17g", pool.mean_ctr[i]);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", pool.mean_revenue[i]);
    out << buf << '\n';
  }
}

}  // namespace lexp
