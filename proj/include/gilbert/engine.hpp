#pragma once

// Gilbert's minimum-distance iteration driven by a linear-optimization
// oracle, in three flavours: plain (segment line search), with a FIFO memory
// of past oracle points (projection onto their hull), and with a heuristic
// oracle that is backed by a single exact call for certification.

#include "gilbert/core.hpp"
#include "gilbert/simplex_projection.hpp"

#include <chrono>
#include <concepts>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace gilbert {

template <class S>
concept LinearOracleSet = requires(const S& set, const Point& c) {
  { set.dimension() } -> std::convertible_to<Eigen::Index>;
  { set.maximize(c) } -> std::same_as<OracleAnswer>;
};

template <class S>
concept HeuristicOracleSet =
    LinearOracleSet<S> && requires(const S& set, const Point& c, std::uint64_t seed) {
      { set.maximize_heuristic(c, seed) } -> std::same_as<OracleAnswer>;
    };

template <LinearOracleSet S>
bool exact_oracle_available(const S& set) {
  if constexpr (requires { { set.exact_available() } -> std::convertible_to<bool>; }) {
    return set.exact_available();
  } else {
    return true;
  }
}

enum class OracleMode {
  exact,                // exact oracle every iteration
  heuristic,            // heuristic every iteration, exact only to certify
  heuristic_only,       // never calls the exact oracle
};

struct RunConfig {
  double delta = 1e-6;
  long max_iterations = 100000;
  int memory = 1;  // 1 selects the plain variant
  // plateau rule: (d_{k-W} - d_k) / d_k < stop_tolerance over W iterations
  double stop_tolerance = 1e-7;
  int plateau_window = 100;
  // the overlap stop test fires when d_k . d'_k exceeds this slack
  double witness_slack = 1e-12;
  double degeneracy_tol = 1e-12;
  double projection_tol = 1e-10;
  std::optional<double> diameter_hint;
  std::uint64_t rng_seed = 0;
  std::optional<Point> initial_point;
  OracleMode oracle_mode = OracleMode::exact;
  // When false the run ignores witnesses and only stops on delta or budget;
  // used for convergence benchmarks and bound extraction.
  bool stop_on_witness = true;
};

inline void validate(const RunConfig& config) {
  if (!(config.delta > 0.0)) throw error(errc::invalid_argument, "delta must be positive");
  if (config.memory < 1) throw error(errc::invalid_argument, "memory must be >= 1");
  if (config.max_iterations < 0) throw error(errc::invalid_argument, "max_iterations must be >= 0");
  if (config.plateau_window < 1) throw error(errc::invalid_argument, "plateau_window must be >= 1");
}

struct IterateState {
  long k = 0;
  Point s;
  double d = 0.0;
  std::optional<double> epsilon;
  // set when the oracle point coincided with s (no descent direction left)
  bool degenerate = false;
};

inline IterateState make_state(const Point& r, Point s, long k = 0) {
  require_same_dimension(r, s, "make_state");
  IterateState state;
  state.k = k;
  state.d = (r - s).norm();
  state.s = std::move(s);
  return state;
}

/// Separating functional: c . r > local_bound = max_{s in S} c . s.
struct Witness {
  Point c;  // unit norm
  double local_bound = 0.0;
  double value_at_r = 0.0;
  double margin = 0.0;
};

enum class Outcome { inside_within_delta, separated, budget_exhausted };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::inside_within_delta: return "InsideWithinDelta";
    case Outcome::separated: return "Separated";
    case Outcome::budget_exhausted: return "IterationBudgetExhausted";
  }
  return "Unknown";
}

struct RunRow {
  long k = 0;
  double d = 0.0;
  std::optional<double> epsilon;
  std::optional<double> overlap;
  std::int64_t wallclock_us = 0;
};

struct RunRecord {
  std::vector<RunRow> rows;
  Outcome outcome = Outcome::budget_exhausted;
  std::optional<Witness> witness;
  Point final_point;
  long exact_calls = 0;
  long heuristic_calls = 0;

  double final_distance() const { return rows.empty() ? 0.0 : rows.back().d; }
};

/// FIFO list of the last `capacity` oracle points.
class MemoryBuffer {
 public:
  explicit MemoryBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw error(errc::invalid_argument, "MemoryBuffer capacity must be >= 1");
  }

  void push(Point p) {
    entries_.push_back(std::move(p));
    if (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
  }

  int capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  const std::deque<Point>& entries() const { return entries_; }

 private:
  int capacity_;
  std::deque<Point> entries_;
};

/// Step length along s' - s minimizing the distance to r.
///
/// `d_vec` is r - s_k and `v_vec` is d'_k - d_k = s_k - s'_k. Returns
/// clamp(-(d.v)/(v.v), 0, 1). Throws DegenerateDirection when |v| is below
/// `tol`.
inline double compute_epsilon(const Point& d_vec, const Point& v_vec, double tol = 1e-12) {
  require_same_dimension(d_vec, v_vec, "compute_epsilon");
  const double vv = v_vec.squaredNorm();
  if (!(std::sqrt(vv) >= tol)) {
    throw error(errc::degenerate_direction, "oracle point coincides with the iterate");
  }
  const double eps = -d_vec.dot(v_vec) / vv;
  return std::clamp(eps, 0.0, 1.0);
}

/// Stop test: a positive overlap d_k . d'_k from an exact oracle proves r is not in S.
inline bool check_stop_witness(double overlap, double tolerance) { return overlap > tolerance; }

namespace detail {

inline double degeneracy_threshold(double d, double tol) { return tol * std::max(1.0, d); }

}  // namespace detail

inline IterateState step_plain(const IterateState& state, const OracleAnswer& answer, const Point& r,
                               double degeneracy_tol = 1e-12) {
  require_same_dimension(r, answer.point, "step_plain");
  const Point d_vec = r - state.s;
  const Point v_vec = state.s - answer.point;
  IterateState next;
  next.k = state.k + 1;
  if (v_vec.norm() < detail::degeneracy_threshold(state.d, degeneracy_tol)) {
    next.s = state.s;
    next.d = state.d;
    next.epsilon = 0.0;
    next.degenerate = true;
    return next;
  }
  const double eps = compute_epsilon(d_vec, v_vec, 0.0);
  next.s = (1.0 - eps) * state.s + eps * answer.point;
  next.d = (r - next.s).norm();
  next.epsilon = eps;
  // never accept a round-off increase
  if (next.d > state.d) {
    next.s = state.s;
    next.d = state.d;
  }
  return next;
}

/// Pushes the oracle point into `buffer`, then projects r onto the hull of
/// the buffer and the current iterate.
inline IterateState step_memory(const IterateState& state, const OracleAnswer& answer, MemoryBuffer& buffer,
                                const Point& r, double projection_tol = 1e-10,
                                double degeneracy_tol = 1e-12) {
  require_same_dimension(r, answer.point, "step_memory");
  const bool degenerate =
      (state.s - answer.point).norm() < detail::degeneracy_threshold(state.d, degeneracy_tol);
  buffer.push(answer.point);

  const auto& entries = buffer.entries();
  const auto cols = static_cast<Eigen::Index>(entries.size()) + 1;
  HullProblem problem;
  problem.columns.resize(r.size(), cols);
  for (Eigen::Index j = 0; j + 1 < cols; ++j) problem.columns.col(j) = entries[static_cast<std::size_t>(j)];
  problem.columns.col(cols - 1) = state.s;
  problem.target = r;

  ProjectionOptions opts;
  opts.tol = projection_tol;
  opts.warm_start = cols - 1;
  const HullProjection proj = project(problem, opts);

  IterateState next;
  next.k = state.k + 1;
  next.degenerate = degenerate;
  next.s = proj.point;
  next.d = (r - next.s).norm();
  if (next.d > state.d) {
    next.s = state.s;
    next.d = state.d;
  }
  return next;
}

template <LinearOracleSet S>
OracleAnswer call_exact(const S& set, const Point& c) {
  if (!exact_oracle_available(set)) {
    throw error(errc::exact_oracle_unavailable, "set provides no exact oracle at this size");
  }
  OracleAnswer a = set.maximize(c);
  a.exact = true;
  return a;
}

/// Builds c = (r - s)/|r - s|, calls the exact oracle once and returns a
/// witness iff c . r exceeds max_{s in S} c . s.
template <LinearOracleSet S>
std::optional<Witness> certify_witness(const Point& r, const Point& s_k, const S& set) {
  require_same_dimension(r, s_k, "certify_witness");
  const Point diff = r - s_k;
  const double norm = diff.norm();
  if (!(norm > 0.0)) {
    // still require an exact oracle, per contract
    if (!exact_oracle_available(set)) {
      throw error(errc::exact_oracle_unavailable, "set provides no exact oracle at this size");
    }
    return std::nullopt;
  }
  Witness w;
  w.c = diff / norm;
  const OracleAnswer answer = call_exact(set, w.c);
  w.local_bound = w.c.dot(answer.point);
  w.value_at_r = w.c.dot(r);
  w.margin = w.value_at_r - w.local_bound;
  if (w.margin > 0.0) return w;
  return std::nullopt;
}

template <LinearOracleSet S>
RunRecord run(const Point& r, const S& set, const RunConfig& config) {
  validate(config);
  if (r.size() != static_cast<Eigen::Index>(set.dimension())) {
    throw error(errc::dimension_mismatch, "point dimension " + std::to_string(r.size()) +
                                              " vs set dimension " + std::to_string(set.dimension()));
  }
  if (!r.allFinite()) throw error(errc::invalid_argument, "point has non-finite entries");

  const bool use_heuristic = config.oracle_mode != OracleMode::exact;
  if constexpr (!HeuristicOracleSet<S>) {
    if (use_heuristic) throw error(errc::invalid_argument, "set has no heuristic oracle");
  }
  const bool exact_allowed = config.oracle_mode != OracleMode::heuristic_only && exact_oracle_available(set);
  if (config.oracle_mode == OracleMode::exact && !exact_allowed) {
    throw error(errc::exact_oracle_unavailable, "exact mode requested but set has no exact oracle");
  }

  RunRecord record;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_us = [&] {
    return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0).count();
  };

  auto oracle = [&](const Point& c, long k) -> OracleAnswer {
    OracleAnswer a;
    if (use_heuristic) {
      if constexpr (HeuristicOracleSet<S>) {
        a = set.maximize_heuristic(c, mix_seed(config.rng_seed, static_cast<std::uint64_t>(k)));
        a.exact = false;
      }
      ++record.heuristic_calls;
    } else {
      a = call_exact(set, c);
      ++record.exact_calls;
    }
    return a;
  };

  Point s0 = config.initial_point ? *config.initial_point : oracle(r, -1).point;
  require_same_dimension(r, s0, "initial point");
  IterateState state = make_state(r, std::move(s0));
  record.rows.push_back({0, state.d, std::nullopt, std::nullopt, elapsed_us()});

  std::optional<MemoryBuffer> buffer;
  if (config.memory > 1) buffer.emplace(config.memory);

  long last_certify = -config.plateau_window;
  auto finish = [&](Outcome o) {
    record.outcome = o;
    record.final_point = state.s;
    return record;
  };

  while (true) {
    if (state.d < config.delta) return finish(Outcome::inside_within_delta);
    if (state.k >= config.max_iterations) return finish(Outcome::budget_exhausted);

    const Point d_vec = r - state.s;
    const OracleAnswer answer = oracle(d_vec, state.k);
    const double overlap = d_vec.dot(r - answer.point);

    std::optional<Witness> fired;
    if (config.stop_on_witness && answer.exact && check_stop_witness(overlap, config.witness_slack)) {
      Witness w;
      w.c = d_vec / state.d;
      w.local_bound = w.c.dot(answer.point);
      w.value_at_r = w.c.dot(r);
      w.margin = w.value_at_r - w.local_bound;
      fired = w;
    }

    IterateState next = buffer ? step_memory(state, answer, *buffer, r, config.projection_tol, config.degeneracy_tol)
                               : step_plain(state, answer, r, config.degeneracy_tol);
    state = std::move(next);
    record.rows.push_back({state.k, state.d, buffer ? std::nullopt : state.epsilon, overlap, elapsed_us()});

    if (fired) {
      // delta-closeness takes precedence over the witness
      if (state.d < config.delta) return finish(Outcome::inside_within_delta);
      record.witness = fired;
      return finish(Outcome::separated);
    }

    if (!config.stop_on_witness || !exact_allowed) continue;

    if (state.k - last_certify < config.plateau_window) continue;
    // a heuristic answer passing the overlap test is only a hint; the exact oracle decides
    bool try_certify = !answer.exact && check_stop_witness(overlap, config.witness_slack);
    try_certify = try_certify || (state.degenerate && state.d >= config.delta);
    if (!try_certify && state.k >= config.plateau_window) {
      const double older = record.rows[static_cast<std::size_t>(state.k - config.plateau_window)].d;
      try_certify = state.d > 0.0 && (older - state.d) / state.d < config.stop_tolerance;
    }
    if (try_certify) {
      last_certify = state.k;
      ++record.exact_calls;
      if (auto w = certify_witness(r, state.s, set)) {
        record.witness = w;
        return finish(Outcome::separated);
      }
    }
  }
}

}  // namespace gilbert
