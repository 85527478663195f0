#pragma once

// Seeded policy-vs-environment experiment loop, trace CSV I/O and the
// experiment configuration.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <algorithm>
#include <tuple>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lexp/baselines.hpp"
#include "lexp/core.hpp"
#include "lexp/environment.hpp"
#include "lexp/lexp.hpp"
#include "lexp/metrics.hpp"

namespace lexp {

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

enum class Algorithm { Lexp, Exp3m1, Exp3m2, Cucb1, Cucb2, Uniform };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Lexp: return "lexp";
    case Algorithm::Exp3m1: return "exp3m-1";
    case Algorithm::Exp3m2: return "exp3m-2";
    case Algorithm::Cucb1: return "cucb-1";
    case Algorithm::Cucb2: return "cucb-2";
    case Algorithm::Uniform: return "uniform";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& name) {
  for (auto a : {Algorithm::Lexp, Algorithm::Exp3m1, Algorithm::Exp3m2, Algorithm::Cucb1,
                 Algorithm::Cucb2, Algorithm::Uniform})
    if (name == to_string(a)) return a;
  throw Error(Errc::Config, "unknown algorithm '" + name +
                                "' (expected lexp, exp3m-1, exp3m-2, cucb-1, cucb-2, uniform)");
}

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::vector<std::size_t> select(Rng& rng) = 0;
  virtual void update(const RoundObservation& obs) = 0;
  virtual double lambda() const { return 0.0; }
};

class LexpPolicy final : public Policy {
 public:
  explicit LexpPolicy(LexpHyperparams hp)
      : hp_(hp), state_(make_lexp_state(hp.arm_count)) {}

  std::vector<std::size_t> select(Rng& rng) override {
    std::tie(capping_, probs_) = lexp_marginals(state_, hp_);
    return dependent_round(probs_, hp_.select_count, rng);
  }

  void update(const RoundObservation& obs) override {
    state_ = update_state(state_, estimate_rewards(obs, probs_), probs_, capping_, hp_);
  }

  double lambda() const override { return state_.lambda; }
  const LexpState& state() const noexcept { return state_; }
  const LexpHyperparams& hyperparams() const noexcept { return hp_; }
  const SelectionProbabilities& probabilities() const noexcept { return probs_; }
  const Capping& capping() const noexcept { return capping_; }

 private:
  LexpHyperparams hp_;
  LexpState state_;
  Capping capping_;
  SelectionProbabilities probs_;
};

class Exp3mPolicy final : public Policy {
 public:
  Exp3mPolicy(LexpHyperparams hp, RewardTarget target)
      : hp_(hp), target_(target), state_(make_lexp_state(hp.arm_count)) {}

  std::vector<std::size_t> select(Rng& rng) override {
    std::tie(capping_, probs_) = lexp_marginals(state_, hp_);
    return dependent_round(probs_, hp_.select_count, rng);
  }

  void update(const RoundObservation& obs) override {
    RewardEstimates est = estimate_rewards(obs, probs_);
    if (target_ == RewardTarget::FirstLevel) est.compound = est.first_level;
    std::fill(est.first_level.begin(), est.first_level.end(), 0.0);
    state_ = update_state(state_, est, probs_, capping_, hp_);
  }

 private:
  LexpHyperparams hp_;
  RewardTarget target_;
  LexpState state_;
  Capping capping_;
  SelectionProbabilities probs_;
};

class CucbPolicy final : public Policy {
 public:
  CucbPolicy(std::size_t arm_count, std::size_t select_count, RewardTarget target)
      : select_count_(select_count), target_(target), state_(make_cucb_state(arm_count)) {}

  std::vector<std::size_t> select(Rng&) override { return cucb_select(state_, select_count_); }
  void update(const RoundObservation& obs) override { state_ = cucb_update(state_, obs, target_); }

 private:
  std::size_t select_count_;
  RewardTarget target_;
  CucbState state_;
};

class UniformPolicy final : public Policy {
 public:
  UniformPolicy(std::size_t arm_count, std::size_t select_count)
      : arm_count_(arm_count), select_count_(select_count) {}

  std::vector<std::size_t> select(Rng& rng) override {
    return uniform_select(arm_count_, select_count_, rng);
  }
  void update(const RoundObservation&) override {}

 private:
  std::size_t arm_count_;
  std::size_t select_count_;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::Lexp;
  std::optional<std::size_t> arm_count;  // K; checked against the arm file
  std::size_t select_count = 1;          // L
  double threshold = 0.0;                // h
  std::size_t horizon = 1;               // T
  std::optional<double> gamma;
  std::optional<double> delta;
  std::uint64_t seed = 0;
  std::size_t replicas = 1;
  std::size_t checkpoint_interval = 100;
  std::string arms_path;
  std::string output_path;
  bool drift_enabled = false;
  std::string nested_spec;  // optional path

  double gamma_or_default() const { return gamma.value_or(default_rate(horizon)); }
  double delta_or_default() const { return delta.value_or(default_rate(horizon)); }
};

namespace detail {

template <typename T>
T json_get(const nlohmann::json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Config, "config key '" + key + "': " + e.what());
  }
}

}  // namespace detail

/// Reads a flat JSON object whose keys are ExperimentConfig field names.
inline ExperimentConfig config_from_json(const nlohmann::json& j,
                                         ExperimentConfig base = ExperimentConfig{}) {
  if (!j.is_object()) throw Error(Errc::Config, "config must be a JSON object");
  ExperimentConfig c = std::move(base);
  for (const auto& [key, value] : j.items()) {
    if (key == "algorithm") c.algorithm = parse_algorithm(detail::json_get<std::string>(j, key));
    else if (key == "K") c.arm_count = detail::json_get<std::size_t>(j, key);
    else if (key == "L") c.select_count = detail::json_get<std::size_t>(j, key);
    else if (key == "h") c.threshold = detail::json_get<double>(j, key);
    else if (key == "T") c.horizon = detail::json_get<std::size_t>(j, key);
    else if (key == "gamma") c.gamma = detail::json_get<double>(j, key);
    else if (key == "delta") c.delta = detail::json_get<double>(j, key);
    else if (key == "seed") c.seed = detail::json_get<std::uint64_t>(j, key);
    else if (key == "replicas") c.replicas = detail::json_get<std::size_t>(j, key);
    else if (key == "checkpoint_interval") c.checkpoint_interval = detail::json_get<std::size_t>(j, key);
    else if (key == "arms_path") c.arms_path = detail::json_get<std::string>(j, key);
    else if (key == "output_path") c.output_path = detail::json_get<std::string>(j, key);
    else if (key == "drift_enabled") c.drift_enabled = detail::json_get<bool>(j, key);
    else if (key == "nested_spec") c.nested_spec = detail::json_get<std::string>(j, key);
    else throw Error(Errc::Config, "unknown config key '" + key + "'");
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::Config, path + ": " + e.what());
  }
  return config_from_json(j, std::move(base));
}

inline void validate_config(const ExperimentConfig& c) {
  if (c.replicas < 1) throw Error(Errc::Config, "replicas must be at least 1");
  if (c.checkpoint_interval < 1) throw Error(Errc::Config, "checkpoint_interval must be at least 1");
  if (c.horizon < 1) throw Error(Errc::Config, "T must be at least 1");
}

/// Nested spec file: {"levels": {"<arm index>": LEVEL, ...}} where LEVEL is
/// {"mean_ctr": [...], "mean_revenue": [...], "select": L', "threshold": h',
///  "children": [LEVEL, ...]} and "children", when present, has one entry
/// per child arm.
inline NestedLevelSpec nested_level_from_json(const nlohmann::json& j) {
  NestedLevelSpec spec;
  try {
    spec.pool.mean_ctr = j.at("mean_ctr").get<std::vector<double>>();
    spec.pool.mean_revenue = j.at("mean_revenue").get<std::vector<double>>();
    spec.select_count = j.at("select").get<std::size_t>();
    spec.threshold = j.value("threshold", 0.0);
    if (j.contains("children"))
      for (const auto& child : j.at("children")) spec.children.push_back(nested_level_from_json(child));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Config, std::string("nested level: ") + e.what());
  }
  return spec;
}

inline std::vector<std::optional<NestedLevelSpec>> load_nested_spec(const std::string& path,
                                                                    std::size_t arm_count) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open nested spec '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::Config, path + ": " + e.what());
  }
  std::vector<std::optional<NestedLevelSpec>> out(arm_count);
  if (!j.contains("levels") || !j["levels"].is_object())
    throw Error(Errc::Config, path + ": expected an object 'levels'");
  for (const auto& [key, level] : j["levels"].items()) {
    const auto arm = static_cast<std::size_t>(detail::parse_integer(key, path));
    if (arm >= arm_count) throw Error(Errc::Config, path + ": arm " + key + " out of range");
    out[arm] = nested_level_from_json(level);
    validate_nested(*out[arm]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kTraceHeader =
    "t,cum_first,cum_compound,regret,violation_perround,violation_eq4,lambda";

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) {
    out << r.t << ',' << format_real(r.cum_first) << ',' << format_real(r.cum_compound) << ','
        << format_real(r.regret) << ',' << format_real(r.violation_perround) << ','
        << format_real(r.violation_eq4) << ',' << format_real(r.lambda) << '\n';
  }
}

inline std::vector<TraceRecord> parse_trace(std::istream& in, const std::string& source = "<trace>") {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::EmptyInput, source + ": empty trace");
  detail::strip_cr(line);
  if (line != kTraceHeader) throw Error(Errc::Parse, source + ":1: unexpected trace header");
  std::vector<TraceRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) throw Error(Errc::Parse, where + ": expected 7 fields");
    TraceRecord r;
    const long long t = detail::parse_integer(f[0], where);
    if (t < 0) throw Error(Errc::Parse, where + ": negative round");
    r.t = static_cast<std::size_t>(t);
    r.cum_first = detail::parse_double(f[1], where);
    r.cum_compound = detail::parse_double(f[2], where);
    r.regret = detail::parse_double(f[3], where);
    r.violation_perround = detail::parse_double(f[4], where);
    r.violation_eq4 = detail::parse_double(f[5], where);
    r.lambda = detail::parse_double(f[6], where);
    records.push_back(r);
  }
  return records;
}

/// Problems found in a trace; empty when every invariant holds.
inline std::vector<std::string> check_trace(const std::vector<TraceRecord>& records) {
  std::vector<std::string> problems;
  // Values are printed with 12 significant digits.
  const auto tol = [](double v) { return 1e-10 * std::max(1.0, std::abs(v)); };
  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto& r = records[n];
    const std::string at = "row " + std::to_string(n + 2) + " (t=" + std::to_string(r.t) + ")";
    if (r.cum_compound > r.cum_first + tol(r.cum_first))
      problems.push_back(at + ": cum_compound exceeds cum_first");
    if (r.cum_first < 0.0 || r.cum_compound < 0.0) problems.push_back(at + ": negative reward");
    if (r.violation_perround < 0.0 || r.violation_eq4 < 0.0)
      problems.push_back(at + ": negative violation");
    if (r.violation_eq4 > r.violation_perround + tol(r.violation_perround))
      problems.push_back(at + ": aggregate violation exceeds per-round violation");
    if (r.lambda < 0.0) problems.push_back(at + ": negative lambda");
    if (n == 0) continue;
    const auto& p = records[n - 1];
    if (r.t <= p.t) problems.push_back(at + ": rounds not increasing");
    if (r.cum_first < p.cum_first - tol(p.cum_first)) problems.push_back(at + ": cum_first decreased");
    if (r.cum_compound < p.cum_compound - tol(p.cum_compound))
      problems.push_back(at + ": cum_compound decreased");
    if (r.violation_perround < p.violation_perround - tol(p.violation_perround))
      problems.push_back(at + ": violation_perround decreased");
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct ReplicaResult {
  std::size_t replica = 0;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> trace;
  bool ok = true;
  std::string error;
};

inline std::unique_ptr<Policy> make_policy(const ExperimentConfig& c, std::size_t arm_count) {
  const std::size_t l = c.select_count;
  switch (c.algorithm) {
    case Algorithm::Lexp: {
      ProblemSpec spec{l, c.threshold, c.horizon};
      return std::make_unique<LexpPolicy>(
          make_lexp_hyperparams(arm_count, spec, c.gamma_or_default(), c.delta_or_default()));
    }
    case Algorithm::Exp3m1:
      return std::make_unique<Exp3mPolicy>(make_exp3m_hyperparams(arm_count, l, c.gamma_or_default()),
                                           RewardTarget::FirstLevel);
    case Algorithm::Exp3m2:
      return std::make_unique<Exp3mPolicy>(make_exp3m_hyperparams(arm_count, l, c.gamma_or_default()),
                                           RewardTarget::Compound);
    case Algorithm::Cucb1: return std::make_unique<CucbPolicy>(arm_count, l, RewardTarget::FirstLevel);
    case Algorithm::Cucb2: return std::make_unique<CucbPolicy>(arm_count, l, RewardTarget::Compound);
    case Algorithm::Uniform: return std::make_unique<UniformPolicy>(arm_count, l);
  }
  throw Error(Errc::Config, "unhandled algorithm");
}

/// Optional per-round hook: (round t, selected arms, reward draw, policy).
using RoundHook = std::function<void(std::size_t, const std::vector<std::size_t>&,
                                     const RewardDraw&, const Policy&)>;

/// One seeded replica. The policy draws from stream 0 of `seed`; the
/// environment uses streams 1 (first level) and 2 (second level).
inline ReplicaResult run_replica(const ExperimentConfig& c, const ArmPool& pool,
                                 const std::vector<std::optional<NestedLevelSpec>>& nested,
                                 std::size_t replica, const RoundHook& hook = {}) {
  ReplicaResult result;
  result.replica = replica;
  result.seed = c.seed + replica;
  const std::size_t k = pool.size();
  auto policy = make_policy(c, k);
  Rng policy_rng = Rng::derive(result.seed, 0);
  Environment env(pool, c.horizon,
                  c.drift_enabled ? RevenueMode::Drifting : RevenueMode::Stationary, result.seed,
                  nested);
  Accumulator acc(pool.mean_ctr, c.threshold);
  try {
    for (std::size_t t = 1; t <= c.horizon; ++t) {
      const RewardDraw draw = env.draw();
      const auto selected = policy->select(policy_rng);
      policy->update(observe(selected, draw));
      acc.record(selected, draw.first_level, draw.second_level);
      if (hook) hook(t, selected, draw, *policy);
      if (t % c.checkpoint_interval == 0 || t == c.horizon) {
        TraceRecord r;
        r.t = t;
        r.cum_first = acc.cum_first();
        r.cum_compound = acc.cum_compound();
        r.regret = regret_at(acc.compound_sums(), pool.mean_ctr, c.select_count, c.threshold,
                             acc.cum_compound());
        r.violation_perround = acc.violation_perround();
        r.violation_eq4 = acc.violation_eq4();
        r.lambda = policy->lambda();
        result.trace.push_back(r);
      }
    }
  } catch (const Error& e) {
    result.ok = false;
    result.error = e.what();
  }
  return result;
}

struct ExperimentOutcome {
  std::vector<ReplicaResult> replicas;
  std::vector<std::string> trace_paths;
  std::string summary_path;
  bool all_ok() const {
    return std::all_of(replicas.begin(), replicas.end(), [](const auto& r) { return r.ok; });
  }
};

inline std::string trace_file_name(std::size_t replica) {
  return "trace_" + std::to_string(replica) + ".csv";
}

inline void write_summary(std::ostream& out, const std::vector<ReplicaResult>& replicas) {
  out << "replica,seed,status,t," << std::string(kTraceHeader).substr(2) << '\n';
  std::vector<TraceRecord> finals;
  for (const auto& r : replicas) {
    const TraceRecord last = r.trace.empty() ? TraceRecord{} : r.trace.back();
    std::string status = r.ok ? "ok" : "failed";
    out << r.replica << ',' << r.seed << ',' << status << ',' << last.t << ','
        << format_real(last.cum_first) << ',' << format_real(last.cum_compound) << ','
        << format_real(last.regret) << ',' << format_real(last.violation_perround) << ','
        << format_real(last.violation_eq4) << ',' << format_real(last.lambda) << '\n';
    if (r.ok) finals.push_back(last);
  }
  const auto stat = [&](auto field, bool want_std) {
    const auto n = static_cast<double>(finals.size());
    if (finals.empty()) return 0.0;
    double mean = 0.0;
    for (const auto& f : finals) mean += field(f);
    mean /= n;
    if (!want_std) return mean;
    if (finals.size() < 2) return 0.0;
    double ss = 0.0;
    for (const auto& f : finals) ss += (field(f) - mean) * (field(f) - mean);
    return std::sqrt(ss / (n - 1.0));
  };
  for (bool want_std : {false, true}) {
    out << (want_std ? "std" : "mean") << ",,," << (finals.empty() ? 0 : finals.front().t);
    out << ',' << format_real(stat([](const TraceRecord& r) { return r.cum_first; }, want_std));
    out << ',' << format_real(stat([](const TraceRecord& r) { return r.cum_compound; }, want_std));
    out << ',' << format_real(stat([](const TraceRecord& r) { return r.regret; }, want_std));
    out << ',' << format_real(stat([](const TraceRecord& r) { return r.violation_perround; }, want_std));
    out << ',' << format_real(stat([](const TraceRecord& r) { return r.violation_eq4; }, want_std));
    out << ',' << format_real(stat([](const TraceRecord& r) { return r.lambda; }, want_std));
    out << '\n';
  }
}

/// Loads the arm pool, validates the problem and hyperparameters, runs every
/// replica and writes trace_<r>.csv files plus summary.csv into
/// `output_path` (created if missing).
inline ExperimentOutcome run_experiment(const ExperimentConfig& c) {
  validate_config(c);
  const ArmPool pool = load_arm_pool(c.arms_path);
  if (c.arm_count && *c.arm_count != pool.size())
    throw Error(Errc::DimensionMismatch, "config K=" + std::to_string(*c.arm_count) +
                                             " but arm file has " + std::to_string(pool.size()) +
                                             " arms");
  validate_problem(pool, ProblemSpec{c.select_count, c.threshold, c.horizon});
  (void)make_policy(c, pool.size());  // surfaces hyperparameter errors before any output
  std::vector<std::optional<NestedLevelSpec>> nested;
  if (!c.nested_spec.empty()) nested = load_nested_spec(c.nested_spec, pool.size());

  std::filesystem::path dir(c.output_path.empty() ? "." : c.output_path);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create output directory '" + dir.string() + "'");

  ExperimentOutcome outcome;
  for (std::size_t r = 0; r < c.replicas; ++r) {
    outcome.replicas.push_back(run_replica(c, pool, nested, r));
    const auto path = dir / trace_file_name(r);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
    write_trace(out, outcome.replicas.back().trace);
    outcome.trace_paths.push_back(path.string());
  }
  const auto summary = dir / "summary.csv";
  std::ofstream out(summary, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write '" + summary.string() + "'");
  write_summary(out, outcome.replicas);
  outcome.summary_path = summary.string();
  return outcome;
}

}  // namespace lexp
