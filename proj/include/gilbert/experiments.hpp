#pragma once

// Experiment pipelines behind the command-line tool. Each returns plain data;
// file output lives in the tool.

#include "gilbert/bell_polytope.hpp"
#include "gilbert/convex_sets.hpp"
#include "gilbert/engine.hpp"
#include "gilbert/fit.hpp"
#include "gilbert/serialize.hpp"
#include "gilbert/steering_set.hpp"

#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace gilbert::experiments {

inline constexpr double kNoDelta = std::numeric_limits<double>::min();

// Distances stall at round-off while the analytic bounds keep shrinking, so
// bound checks allow this much absolute slack (relative to the diameter).
inline constexpr double kRoundoff = 1e-14;

// ---------------------------------------------------------------- separate

struct SeparateResult {
  RunRecord record;
  std::string set_name;
};

/// Runs the engine on {"set": ..., "point": ..., "initial_point"?: [...], "run": {...}}.
inline SeparateResult cmd_separate(const json& spec, std::optional<RunConfig> override = {}) {
  const AnySet set = set_from_json(spec.at("set"));
  RunConfig config = override ? *override : run_config_from_json(spec.value("run", json::object()));
  const Point r = point_from_spec(spec.at("point"), config.rng_seed);
  if (spec.contains("initial_point")) config.initial_point = point_from_json(spec.at("initial_point"));
  return {run(r, set, config), set.name()};
}

inline int exit_code(Outcome o) {
  switch (o) {
    case Outcome::inside_within_delta: return 0;
    case Outcome::separated: return 2;
    case Outcome::budget_exhausted: return 3;
  }
  return 1;
}

// ------------------------------------------------------------------- bench

struct BenchOptions {
  long iterations = 100000;
  std::optional<long> burn_in;  // shape default when absent
  std::uint64_t seed = 7;
  std::vector<int> memories = {1, 5, 10, 20, 30};  // hull-memory only
};

struct BenchRun {
  int memory = 1;
  RunRecord record;
  double dstar = 0.0;
  double final_excess = 0.0;
};

struct BenchResult {
  std::string shape;
  std::vector<BenchRun> runs;
  std::optional<SlopeFit> fit;
  std::string fit_kind;  // "loglog" or "exponential"
  double diameter = 0.0;
  std::optional<double> gap;
  // largest d_k / (bound_k + round-off slack) over the trace; <= 1 means the bound holds
  std::optional<double> bound_ratio;
};

inline std::vector<double> excess_series(const RunRecord& record, double dstar) {
  std::vector<double> out;
  out.reserve(record.rows.size());
  for (const auto& row : record.rows) out.push_back(row.d - dstar);
  return out;
}

inline const std::vector<std::string>& bench_shapes() {
  static const std::vector<std::string> shapes = {"rectangle-exterior", "rectangle-boundary", "rectangle-interior",
                                                  "circle", "hull-memory", "rectangle-memory"};
  return shapes;
}

inline RunConfig bench_config(long iterations, int memory = 1) {
  RunConfig c;
  c.max_iterations = iterations;
  c.memory = memory;
  c.delta = kNoDelta;
  c.stop_on_witness = false;
  return c;
}

/// The high-dimensional hull used for the memory sweep, and its external point.
inline std::pair<ProductHullSet, Point> memory_hull_instance(std::uint64_t seed) {
  ProductHullSet set = ProductHullSet::seeded(400, 39, seed);
  std::mt19937_64 rng(seed + 4);
  std::normal_distribution<double> normal(0.0, 1.0);
  Point r(400);
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = normal(rng);
  return {std::move(set), std::move(r)};
}

inline BenchResult cmd_convergence_bench(const std::string& shape, const BenchOptions& options = {}) {
  BenchResult out;
  out.shape = shape;
  const BoxSet rect = BoxSet::rectangle();
  const Point s0{{0.5, -1.0}};

  auto single = [&](const auto& set, const Point& r, const RunConfig& config) {
    const SetMetadata meta = set.metadata(r);
    BenchRun run_result;
    run_result.memory = config.memory;
    run_result.record = run(r, set, config);
    run_result.dstar = meta.known_dstar.value_or(0.0);
    run_result.final_excess = run_result.record.final_distance() - run_result.dstar;
    out.diameter = meta.diameter;
    out.gap = meta.boundary_gap;
    out.runs.push_back(std::move(run_result));
  };

  if (shape == "rectangle-exterior" || shape == "rectangle-boundary") {
    const Point r = shape == "rectangle-exterior" ? Point{{0.0, 1.0}} : Point{{0.0, 0.0}};
    RunConfig config = bench_config(options.iterations);
    config.initial_point = s0;
    single(rect, r, config);
    const auto excess = excess_series(out.runs[0].record, out.runs[0].dstar);
    out.fit = fit_loglog_slope(excess, {options.burn_in.value_or(100), std::nullopt, 0.0});
    out.fit_kind = "loglog";
  } else if (shape == "rectangle-interior") {
    const Point r{{-0.5, -0.1}};
    RunConfig config = bench_config(options.iterations);
    config.initial_point = s0;
    single(rect, r, config);
    const auto& rec = out.runs[0].record;
    const auto excess = excess_series(rec, 0.0);
    out.fit = fit_exponential(excess, {options.burn_in.value_or(100), std::nullopt, 1e-13});
    out.fit_kind = "exponential";
    const double g = *out.gap, big_d = out.diameter, d0 = rec.rows.front().d;
    double worst = 0.0;
    for (const auto& row : rec.rows) {
      const double bound = std::pow(1.0 - g * g / (big_d * big_d), 0.5 * static_cast<double>(row.k)) * d0;
      worst = std::max(worst, row.d / (bound + kRoundoff * big_d));
    }
    out.bound_ratio = worst;
  } else if (shape == "circle") {
    const BallSet disc = BallSet::unit_disc();
    const Point r{{0.0, 1.3}};
    RunConfig config = bench_config(options.iterations);
    config.initial_point = Point{{1.0, 0.0}};
    single(disc, r, config);
    const auto& run0 = out.runs[0];
    const auto excess = excess_series(run0.record, run0.dstar);
    // the trace hits round-off within ~50 iterations, so the window starts early
    out.fit = fit_exponential(excess, {options.burn_in.value_or(0), std::nullopt, 1e-13});
    out.fit_kind = "exponential";
    const double curvature = *disc.metadata(r).curvature;
    const double lambda = std::min(0.5, run0.dstar / (2.0 * (out.diameter + 1.0 / curvature)));
    double worst = 0.0;
    for (const auto& row : run0.record.rows) {
      const double bound = run0.dstar + std::pow(1.0 - lambda, static_cast<double>(row.k)) * out.diameter;
      worst = std::max(worst, row.d / (bound + kRoundoff * out.diameter));
    }
    out.bound_ratio = worst;
  } else if (shape == "hull-memory") {
    const auto [set, r] = memory_hull_instance(options.seed);
    for (int m : options.memories) single(set, r, bench_config(options.iterations, m));
  } else if (shape == "rectangle-memory") {
    RunConfig config = bench_config(options.iterations, 2);
    config.initial_point = s0;
    single(rect, Point{{0.0, 1.0}}, config);
  } else {
    throw error(errc::invalid_argument, "unknown bench shape '" + shape + "'");
  }
  return out;
}

/// First iteration at which d_k - d* <= tol, if any.
inline std::optional<long> iterations_to_reach(const RunRecord& record, double dstar, double tol) {
  for (const auto& row : record.rows) {
    if (row.d - dstar <= tol) return row.k;
  }
  return std::nullopt;
}

// ------------------------------------------------------------------ werner

inline bell::MeasurementResult cmd_werner(int n, const bell::MeasurementConfig& config) {
  return bell::optimize_measurements(n, config);
}

// --------------------------------------------------------------------- ghz

struct GhzOptions {
  double p = 0.6;
  long iterations = 10000;
  int memory = 32;
  std::uint64_t seed = 0;
  int exact_cap = 12;
  int restarts = 64;
  bool heuristic_only = false;
};

struct GhzResult {
  bell::Tensor3 w;
  double local_bound = 0.0;
  bool local_bound_exact = true;
  double quantum_value = 0.0;
  double bound = 1.0;
  RunRecord record;
};

/// Runs the engine on the noisy GHZ point and turns r - s_k into a
/// tripartite Bell functional.
inline GhzResult cmd_ghz(int n, const GhzOptions& options = {}) {
  const bell::Tensor3 q = bell::ghz_point(n, std::nullopt, options.p);
  const bell::Bell3Polytope polytope(n, options.exact_cap, options.restarts);
  const bool exact = polytope.exact_available() && !options.heuristic_only;
  RunConfig config = bench_config(options.iterations, options.memory);
  config.rng_seed = options.seed;
  config.oracle_mode = exact ? OracleMode::exact : OracleMode::heuristic_only;

  GhzResult out;
  out.record = run(q.data, polytope, config);
  const Point diff = q.data - out.record.final_point;
  if (!(diff.norm() > 0.0)) throw error(errc::no_separation, "GHZ point reached the polytope");
  out.w = {n, diff / diff.norm()};
  const bell::OracleResult local = exact ? bell::bell3_exact_oracle(out.w, options.exact_cap)
                                         : bell::bell3_heuristic_oracle(out.w, 16 * options.restarts, options.seed);
  out.local_bound = local.value;
  out.local_bound_exact = exact;
  const bell::Tensor3 q1 = bell::ghz_point(n, std::nullopt, 1.0);
  out.quantum_value = q1.data.dot(out.w.data);
  out.bound = bell::visibility_bound(out.w, out.local_bound, q1);
  return out;
}

// ---------------------------------------------------------------- steering

struct SteeringOptions {
  std::vector<int> memories = {1, 10, 100};
  std::vector<long> checkpoints = {100, 1000, 10000, 100000};
  double v = 0.51;
  int restarts = 100;
  std::uint64_t seed = 0;
  // exact certification of the final witness; n = 30 needs a raised cap
  int certify_cap = 30;
  int certify_restarts = 10000;
};

struct SteeringResult {
  // distances[m][k]
  std::map<int, std::map<long, double>> distances;
  std::map<int, RunRecord> records;
  SteeringWitness witness;  // from the run with the largest memory
};

inline SteeringResult cmd_steering(const SteeringOptions& options = {}) {
  if (options.memories.empty() || options.checkpoints.empty()) {
    throw error(errc::invalid_argument, "steering needs at least one memory size and checkpoint");
  }
  const auto dirs = steering::buckyball_directions();
  const int n = static_cast<int>(dirs.size());
  const Point r = steering::steering_point(dirs, options.v);
  const steering::SteeringSet set(n, 24, options.restarts);
  const long k_max = *std::max_element(options.checkpoints.begin(), options.checkpoints.end());

  SteeringResult out;
  for (int m : options.memories) {
    RunConfig config = bench_config(k_max, m);
    config.oracle_mode = OracleMode::heuristic_only;
    config.rng_seed = options.seed;
    RunRecord record = run(r, set, config);
    for (long k : options.checkpoints) out.distances[m][k] = record.rows.at(static_cast<std::size_t>(k)).d;
    out.records.emplace(m, std::move(record));
  }

  const int m_best = *std::max_element(options.memories.begin(), options.memories.end());
  const Point diff = r - out.records.at(m_best).final_point;
  const Point w = diff / diff.norm();
  SteeringWitness& wit = out.witness;
  wit.w = steering::as_matrix(w);
  if (n <= options.certify_cap) {
    wit.unsteerable_bound = steering::steering_exact_oracle(w, options.certify_cap).value;
    wit.bound_exact = true;
  } else {
    wit.unsteerable_bound = steering::steering_seesaw_oracle(w, options.certify_restarts, options.seed).value;
    wit.bound_exact = false;
  }
  wit.quantum_value = steering::quantum_value(dirs, w);
  wit.v_bound = steering::steering_bound(wit.unsteerable_bound, wit.quantum_value);
  return out;
}

}  // namespace gilbert::experiments
