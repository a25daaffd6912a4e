// Command-line front end: separate, bench, werner, ghz, steer.

#include "gilbert/experiments.hpp"
#include "gilbert/parallel.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace gilbert;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  long iters = -1;
  int memory = -1;
  double delta = -1.0;
  int threads = 0;
  std::string out = ".";
  bool heuristic_only = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON configuration file");
  cmd->add_option("--seed", c.seed, "top-level random seed");
  cmd->add_option("--iters", c.iters, "iteration budget");
  cmd->add_option("--memory", c.memory, "memory buffer size (1 = plain)");
  cmd->add_option("--delta", c.delta, "inside tolerance");
  cmd->add_option("--threads", c.threads, "worker thread cap (0 = all cores)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_flag("--heuristic-only", c.heuristic_only, "never call the exact oracle");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::invalid_argument, "cannot open " + path);
  return json::parse(in);
}

std::ofstream open_out(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / name);
  if (!f) throw error(errc::invalid_argument, "cannot write " + (fs::path(c.out) / name).string());
  return f;
}

void write_json(const Common& c, const std::string& name, const json& j) { open_out(c, name) << j.dump(2) << '\n'; }

int run_separate(const Common& c) {
  if (c.config.empty()) throw error(errc::invalid_argument, "separate requires --config");
  const json spec = read_json(c.config);
  RunConfig config = run_config_from_json(spec.value("run", json::object()));
  if (c.iters >= 0) config.max_iterations = c.iters;
  if (c.memory > 0) config.memory = c.memory;
  if (c.delta > 0) config.delta = c.delta;
  if (c.seed) config.rng_seed = c.seed;
  if (c.heuristic_only) config.oracle_mode = OracleMode::heuristic_only;
  const auto result = experiments::cmd_separate(spec, config);
  {
    auto f = open_out(c, "trace.csv");
    write_trace_csv(f, result.record);
  }
  const auto& rec = result.record;
  std::cout << "set " << result.set_name << ": " << to_string(rec.outcome) << " after " << rec.rows.back().k
            << " iterations, d = " << format_double(rec.final_distance()) << '\n';
  if (rec.witness) {
    write_json(c, "witness.json", witness_json(*rec.witness));
    std::cout << "witness margin " << format_double(rec.witness->margin) << '\n';
  }
  return experiments::exit_code(rec.outcome);
}

int run_bench(const Common& c, const std::string& shape, long burn_in) {
  experiments::BenchOptions options;
  if (c.iters >= 0) options.iterations = c.iters;
  if (burn_in >= 0) options.burn_in = burn_in;
  if (c.seed) options.seed = c.seed;
  if (c.memory > 0) options.memories = {c.memory};
  if (!c.config.empty()) {
    const json j = read_json(c.config);
    options.iterations = j.value("iterations", options.iterations);
    if (j.contains("burn_in")) options.burn_in = j.at("burn_in").get<long>();
    if (j.contains("memories")) options.memories = j.at("memories").get<std::vector<int>>();
  }
  const auto result = experiments::cmd_convergence_bench(shape, options);
  for (const auto& run : result.runs) {
    const std::string name = result.runs.size() == 1 ? "trace.csv" : "trace_m" + std::to_string(run.memory) + ".csv";
    auto f = open_out(c, name);
    write_trace_csv(f, run.record);
    std::cout << shape << " m=" << run.memory << ": d* = " << format_double(run.dstar)
              << ", final d - d* = " << format_double(run.final_excess) << '\n';
  }
  json summary = {{"shape", shape}, {"diameter", result.diameter}};
  if (result.fit) {
    summary["fit"] = {{"kind", result.fit_kind},
                      {"slope", result.fit->slope},
                      {"intercept", result.fit->intercept},
                      {"r_squared", result.fit->r_squared},
                      {"points", result.fit->points}};
    std::cout << result.fit_kind << " fit: slope " << format_double(result.fit->slope) << ", intercept "
              << format_double(result.fit->intercept) << ", r^2 " << format_double(result.fit->r_squared) << '\n';
  }
  if (result.bound_ratio) {
    summary["max_ratio_to_bound"] = *result.bound_ratio;
    std::cout << "max d_k / bound_k = " << format_double(*result.bound_ratio) << '\n';
  }
  write_json(c, "fit.json", summary);
  return 0;
}

int run_werner(const Common& c, int n, double v_start, double dv, double v_floor) {
  bell::MeasurementConfig config;
  config.v_start = v_start;
  config.dv = dv;
  config.v_floor = v_floor;
  config.seed = c.seed;
  if (c.iters >= 0) config.engine_iterations = c.iters;
  if (c.memory > 0) config.memory = c.memory;
  if (c.heuristic_only) config.oracle_mode = OracleMode::heuristic_only;
  if (!c.config.empty()) {
    const json j = read_json(c.config);
    if (j.contains("measurements")) config.initial = measurements_from_json(j.at("measurements"));
    config.stall_rounds = j.value("stall_rounds", config.stall_rounds);
    config.exact_cap = j.value("exact_cap", config.exact_cap);
  }
  const auto result = experiments::cmd_werner(n, config);
  write_json(c, "witness.json", bell_witness_json(result.witness));
  write_json(c, "measurements.json", measurements_json(result.vectors));
  std::cout << "n=" << n << ": visibility bound " << format_double(result.bound)
            << (result.witness.local_bound_exact ? "" : " (heuristic local bound)") << ", last v "
            << format_double(result.final_v) << ", rounds " << result.rounds << '\n';
  return 0;
}

int run_ghz(const Common& c, int n, double p) {
  experiments::GhzOptions options;
  options.p = p;
  options.seed = c.seed;
  options.heuristic_only = c.heuristic_only;
  if (c.iters >= 0) options.iterations = c.iters;
  if (c.memory > 0) options.memory = c.memory;
  const auto result = experiments::cmd_ghz(n, options);
  {
    auto f = open_out(c, "trace.csv");
    write_trace_csv(f, result.record);
  }
  write_json(c, "witness.json",
             {{"shape", {n, n, n}},
              {"W", tensor_json(result.w)},
              {"local_bound", result.local_bound},
              {"local_bound_exact", result.local_bound_exact},
              {"quantum_value", result.quantum_value},
              {"visibility_bound", result.bound}});
  std::cout << "n=" << n << ": GHZ bound " << format_double(result.bound)
            << (result.local_bound_exact ? "" : " (heuristic local bound)") << '\n';
  return 0;
}

int run_steer(const Common& c, std::vector<int> memories, std::vector<long> checkpoints, double v) {
  experiments::SteeringOptions options;
  if (!memories.empty()) options.memories = std::move(memories);
  if (c.memory > 0) options.memories = {c.memory};
  if (!checkpoints.empty()) options.checkpoints = std::move(checkpoints);
  if (c.iters > 0) options.checkpoints = {c.iters};
  options.v = v;
  options.seed = c.seed;
  if (c.heuristic_only) options.certify_cap = 0;
  const auto result = experiments::cmd_steering(options);
  {
    auto f = open_out(c, "table.csv");
    f << "k";
    for (const auto& [m, row] : result.distances) f << ",m=" << m;
    f << '\n';
    for (long k : options.checkpoints) {
      f << k;
      for (const auto& [m, row] : result.distances) f << ',' << format_double(row.at(k));
      f << '\n';
    }
  }
  for (const auto& [m, rec] : result.records) {
    auto f = open_out(c, "trace_m" + std::to_string(m) + ".csv");
    write_trace_csv(f, rec);
  }
  write_json(c, "witness.json", steering_witness_json(result.witness));
  for (const auto& [m, row] : result.distances) {
    std::cout << "m=" << m << ':';
    for (const auto& [k, d] : row) std::cout << " d(" << k << ")=" << format_double(d);
    std::cout << '\n';
  }
  std::cout << "steering bound " << format_double(result.witness.v_bound)
            << (result.witness.bound_exact ? " (exact)" : " (heuristic-certified)") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gilbert's algorithm for convex separation"};
  app.require_subcommand(1);
  Common common;

  auto* separate = app.add_subcommand("separate", "separate a point from a JSON-described set");
  add_common(separate, common);

  auto* bench = app.add_subcommand("bench", "convergence benchmark on a test set");
  add_common(bench, common);
  std::string shape = "rectangle-exterior";
  long burn_in = -1;
  bench->add_option("shape", shape, "benchmark shape")->check(CLI::IsMember(experiments::bench_shapes()));
  bench->add_option("--burn-in", burn_in, "iterations dropped before fitting");

  auto* werner = app.add_subcommand("werner", "visibility bound for two-qubit Werner states");
  add_common(werner, common);
  int werner_n = 2;
  double v_start = 1.0, dv = 0.001, v_floor = 0.70;
  werner->add_option("-n", werner_n, "settings per party");
  werner->add_option("--v-start", v_start);
  werner->add_option("--dv", dv);
  werner->add_option("--v-floor", v_floor);

  auto* ghz = app.add_subcommand("ghz", "noise bound for three-qubit GHZ states");
  add_common(ghz, common);
  int ghz_n = 2;
  double p = 0.6;
  ghz->add_option("-n", ghz_n, "settings per party");
  ghz->add_option("-p", p, "noise parameter of the GHZ point");

  auto* steer = app.add_subcommand("steer", "steering distances and bound for the buckyball configuration");
  add_common(steer, common);
  std::vector<int> memories;
  std::vector<long> checkpoints;
  double steer_v = 0.51;
  steer->add_option("--memories", memories, "memory sizes");
  steer->add_option("--checkpoints", checkpoints, "iterations at which d is reported");
  steer->add_option("-v", steer_v, "visibility of the steering point");

  CLI11_PARSE(app, argc, argv);
  try {
    set_thread_limit(common.threads);
    if (*separate) return run_separate(common);
    if (*bench) return run_bench(common, shape, burn_in);
    if (*werner) return run_werner(common, werner_n, v_start, dv, v_floor);
    if (*ghz) return run_ghz(common, ghz_n, p);
    if (*steer) return run_steer(common, memories, checkpoints, steer_v);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
