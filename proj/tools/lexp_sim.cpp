// lexp_sim: command-line front end for the constrained multiple-play bandit
// simulator.
//
//   lexp_sim run --arms pool.csv --select 5 --threshold 1.2 --horizon 50000 --out runs/a
//   lexp_sim oracle --arms pool.csv --select 2 --threshold 1.5
//   lexp_sim ingest --raw items.csv --out pool.csv
//   lexp_sim check-trace runs/a/trace_0.csv
//
// Exit status: 0 ok, 2 config/input error, 3 infeasible problem, 4 numeric
// failure during a run.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lexp/experiment.hpp"
#include "lexp/ingest.hpp"
#include "lexp/oracle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(lexp::Errc code) {
  switch (code) {
    case lexp::Errc::InfeasibleThreshold:
    case lexp::Errc::Infeasible:
      return kExitInfeasible;
    case lexp::Errc::NumericOverflow:
    case lexp::Errc::CappingUnsolvable:
    case lexp::Errc::MalformedVector:
      return kExitNumeric;
    default:
      return kExitConfig;
  }
}

struct RunArgs {
  std::string config_path;
  std::optional<std::string> algorithm;
  std::optional<std::size_t> arms_count;
  std::optional<std::size_t> select;
  std::optional<double> threshold;
  std::optional<std::size_t> horizon;
  std::optional<double> gamma;
  std::optional<double> delta;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<std::size_t> checkpoint_interval;
  std::optional<std::string> arms_path;
  std::optional<std::string> out;
  std::optional<std::string> nested;
  bool drift = false;
};

lexp::ExperimentConfig resolve_config(const RunArgs& a) {
  lexp::ExperimentConfig c;
  if (!a.config_path.empty()) c = lexp::load_config(a.config_path);
  if (a.algorithm) c.algorithm = lexp::parse_algorithm(*a.algorithm);
  if (a.arms_count) c.arm_count = *a.arms_count;
  if (a.select) c.select_count = *a.select;
  if (a.threshold) c.threshold = *a.threshold;
  if (a.horizon) c.horizon = *a.horizon;
  if (a.gamma) c.gamma = *a.gamma;
  if (a.delta) c.delta = *a.delta;
  if (a.seed) c.seed = *a.seed;
  if (a.replicas) c.replicas = *a.replicas;
  if (a.checkpoint_interval) c.checkpoint_interval = *a.checkpoint_interval;
  if (a.arms_path) c.arms_path = *a.arms_path;
  if (a.out) c.output_path = *a.out;
  if (a.nested) c.nested_spec = *a.nested;
  if (a.drift) c.drift_enabled = true;
  if (c.arms_path.empty()) throw lexp::Error(lexp::Errc::Config, "no arm pool given (--arms)");
  return c;
}

int do_run(const RunArgs& args) {
  const auto config = resolve_config(args);
  const auto outcome = lexp::run_experiment(config);
  for (const auto& r : outcome.replicas) {
    if (r.ok) {
      const auto& last = r.trace.back();
      std::printf("replica %zu seed %llu: regret %s violation %s lambda %s\n", r.replica,
                  static_cast<unsigned long long>(r.seed), lexp::format_real(last.regret).c_str(),
                  lexp::format_real(last.violation_perround).c_str(),
                  lexp::format_real(last.lambda).c_str());
    } else {
      std::fprintf(stderr, "replica %zu seed %llu failed: %s\n", r.replica,
                   static_cast<unsigned long long>(r.seed), r.error.c_str());
    }
  }
  std::printf("summary: %s\n", outcome.summary_path.c_str());
  return outcome.all_ok() ? kExitOk : kExitNumeric;
}

struct OracleArgs {
  std::string arms_path;
  std::size_t select = 1;
  double threshold = 0.0;
  std::string g_file;
};

int do_oracle(const OracleArgs& args) {
  const auto pool = lexp::load_arm_pool(args.arms_path);
  std::vector<double> g = pool.mean_compound();
  if (!args.g_file.empty()) {
    std::ifstream in(args.g_file);
    if (!in) throw lexp::Error(lexp::Errc::Io, "cannot open '" + args.g_file + "'");
    g.clear();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      lexp::detail::strip_cr(line);
      if (lexp::detail::trim(line).empty()) continue;
      g.push_back(lexp::detail::parse_double(line, args.g_file + ":" + std::to_string(line_no)));
    }
  }
  try {
    const auto sol = lexp::solve_constrained_lp(g, pool.mean_ctr, args.select, args.threshold);
    std::printf("x*:");
    for (double v : sol.x) std::printf(" %s", lexp::format_real(v).c_str());
    std::printf("\nobjective: %s\nslack: %s\nmultiplier: %s\n",
                lexp::format_real(sol.objective).c_str(),
                lexp::format_real(sol.constraint_slack).c_str(),
                lexp::format_real(sol.multiplier).c_str());
  } catch (const lexp::Error& e) {
    if (e.code() != lexp::Errc::Infeasible) throw;
    std::printf("infeasible: achievable maximum %s\n", lexp::format_real(e.value()).c_str());
    return kExitInfeasible;
  }
  return kExitOk;
}

struct IngestArgs {
  std::string raw_path;
  std::string out_path;
  std::uint64_t max_views = lexp::kDefaultMaxViews;
  std::uint64_t min_conversions = lexp::kDefaultMinConversions;
};

int do_ingest(const IngestArgs& args) {
  const auto rows = lexp::load_raw_items(args.raw_path);
  const auto kept = lexp::filter_items(rows, args.max_views, args.min_conversions);
  std::printf("kept %zu, dropped %zu\n", kept.size(), rows.size() - kept.size());
  if (kept.empty()) {
    std::fprintf(stderr, "error: no items survive the filter\n");
    return kExitConfig;
  }
  const auto pool = lexp::compute_rates_and_scale(kept);
  std::ofstream out(args.out_path, std::ios::binary);
  if (!out) throw lexp::Error(lexp::Errc::Io, "cannot write '" + args.out_path + "'");
  lexp::write_arm_pool(out, pool);
  return kExitOk;
}

int do_check_trace(const std::vector<std::string>& paths) {
  int status = kExitOk;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw lexp::Error(lexp::Errc::Io, "cannot open '" + path + "'");
    const auto problems = lexp::check_trace(lexp::parse_trace(in, path));
    if (problems.empty()) {
      std::printf("%s: ok\n", path.c_str());
      continue;
    }
    for (const auto& p : problems) std::printf("%s: %s\n", path.c_str(), p.c_str());
    status = kExitConfig;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained multiple-play bandit simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a seeded experiment and write trace CSVs");
  run->add_option("--config", run_args.config_path, "JSON config keyed by field name")
      ->check(CLI::ExistingFile);
  run->add_option("--algorithm", run_args.algorithm,
                  "lexp, exp3m-1, exp3m-2, cucb-1, cucb-2 or uniform");
  run->add_option("--K", run_args.arms_count, "Expected number of arms");
  run->add_option("--select,-L", run_args.select, "Arms selected per round");
  run->add_option("--threshold,-H", run_args.threshold, "Per-round first-level threshold h");
  run->add_option("--horizon,-T", run_args.horizon, "Number of rounds");
  run->add_option("--gamma", run_args.gamma, "Exploration rate (default T^-1/3)");
  run->add_option("--delta", run_args.delta, "Multiplier regularizer (default T^-1/3)");
  run->add_option("--seed", run_args.seed, "Base seed; replica r uses seed + r");
  run->add_option("--replicas", run_args.replicas);
  run->add_option("--checkpoint-interval", run_args.checkpoint_interval);
  run->add_option("--arms", run_args.arms_path, "Arm pool CSV (arm_id,mean_ctr,mean_revenue)");
  run->add_option("--out", run_args.out, "Output directory");
  run->add_option("--nested", run_args.nested, "Nested level spec (JSON)");
  run->add_flag("--drift", run_args.drift, "Triangle-wave second-level rewards");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "Solve the relaxed benchmark LP for a pool");
  oracle->add_option("--arms", oracle_args.arms_path)->required();
  oracle->add_option("--select,-L", oracle_args.select)->required();
  oracle->add_option("--threshold,-H", oracle_args.threshold)->required();
  oracle->add_option("--g-file", oracle_args.g_file, "One objective coefficient per line");

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "Build an arm pool from per-item counts");
  ingest->add_option("--raw", ingest_args.raw_path, "CSV item_id,views,conversions")->required();
  ingest->add_option("--out", ingest_args.out_path)->required();
  ingest->add_option("--max-views", ingest_args.max_views);
  ingest->add_option("--min-conversions", ingest_args.min_conversions);

  std::vector<std::string> trace_paths;
  auto* check = app.add_subcommand("check-trace", "Validate trace CSV invariants");
  check->add_option("traces", trace_paths)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return do_run(run_args);
    if (*oracle) return do_oracle(oracle_args);
    if (*ingest) return do_ingest(ingest_args);
    if (*check) return do_check_trace(trace_paths);
  } catch (const lexp::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (e.code() == lexp::Errc::InfeasibleThreshold || e.code() == lexp::Errc::Infeasible)
      std::fprintf(stderr, "achievable maximum: %s\n", lexp::format_real(e.value()).c_str());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
