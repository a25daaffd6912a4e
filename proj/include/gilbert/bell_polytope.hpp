#pragma once

// Correlation polytopes of two and three parties with two outcomes per
// measurement: vertices are products of +-1 strategies, D(x,y) = a_x b_y and
// D(x,y,z) = a_x b_y c_z. Quantum points come from the two-qubit Werner state
// and the noisy three-qubit GHZ state.

#include "gilbert/core.hpp"
#include "gilbert/engine.hpp"
#include "gilbert/parallel.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace gilbert::bell {

using Vec3 = Eigen::Vector3d;

struct BlochVectors {
  std::vector<Vec3> a;
  std::vector<Vec3> b;

  int settings() const { return static_cast<int>(a.size()); }
};

inline void check_unit(const std::vector<Vec3>& vs, const char* who) {
  for (const auto& v : vs) {
    if (!(std::abs(v.norm() - 1.0) <= 1e-12)) {
      throw error(errc::non_unit_vector, std::string(who) + ": Bloch vector norm " + std::to_string(v.norm()));
    }
  }
}

inline Vec3 random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  while (true) {
    Vec3 v(normal(rng), normal(rng), normal(rng));
    const double n = v.norm();
    if (n > 1e-6) return v / n;
  }
}

inline BlochVectors random_bloch_vectors(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BlochVectors out;
  for (int i = 0; i < n; ++i) out.a.push_back(random_unit_vector(rng));
  for (int i = 0; i < n; ++i) out.b.push_back(random_unit_vector(rng));
  return out;
}

/// Row-major flattening, index x * cols + y.
inline Point flatten(const Eigen::MatrixXd& m) {
  Point p(m.size());
  for (Eigen::Index x = 0; x < m.rows(); ++x) {
    for (Eigen::Index y = 0; y < m.cols(); ++y) p(x * m.cols() + y) = m(x, y);
  }
  return p;
}

inline Eigen::MatrixXd unflatten(const Point& p, Eigen::Index rows, Eigen::Index cols) {
  if (p.size() != rows * cols) throw error(errc::dimension_mismatch, "unflatten");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index x = 0; x < rows; ++x) {
    for (Eigen::Index y = 0; y < cols; ++y) m(x, y) = p(x * cols + y);
  }
  return m;
}

/// n x n x n array stored flat at (x * n + y) * n + z.
struct Tensor3 {
  int n = 0;
  Point data;

  static Tensor3 zero(int n) { return {n, Point::Zero(static_cast<Eigen::Index>(n) * n * n)}; }

  double& operator()(int x, int y, int z) { return data((static_cast<Eigen::Index>(x) * n + y) * n + z); }
  double operator()(int x, int y, int z) const { return data((static_cast<Eigen::Index>(x) * n + y) * n + z); }
};

inline int settings_from_flat3(Eigen::Index size) {
  const auto n = static_cast<int>(std::lround(std::cbrt(static_cast<double>(size))));
  if (static_cast<Eigen::Index>(n) * n * n != size) throw error(errc::dimension_mismatch, "not a cube");
  return n;
}

/// Q(x,y) = -v a_x . b_y
inline Eigen::MatrixXd werner_point(const BlochVectors& vectors, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw error(errc::invalid_argument, "werner_point: v outside [0,1]");
  if (vectors.a.size() != vectors.b.size()) throw error(errc::dimension_mismatch, "werner_point: a/b counts");
  check_unit(vectors.a, "werner_point");
  check_unit(vectors.b, "werner_point");
  const auto n = static_cast<Eigen::Index>(vectors.a.size());
  Eigen::MatrixXd q(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      q(x, y) = -v * vectors.a[static_cast<std::size_t>(x)].dot(vectors.b[static_cast<std::size_t>(y)]);
    }
  }
  return q;
}

struct PlanarAngles {
  std::vector<double> a, b, c;
};

/// theta_i = pi (i - 1) / n for all three parties.
inline PlanarAngles default_ghz_angles(int n) {
  PlanarAngles angles;
  for (int i = 0; i < n; ++i) {
    const double t = std::numbers::pi * i / n;
    angles.a.push_back(t);
    angles.b.push_back(t);
    angles.c.push_back(t);
  }
  return angles;
}

/// Q(x,y,z) = p cos(theta^a_x + theta^b_y + theta^c_z)
inline Tensor3 ghz_point(int n, const std::optional<PlanarAngles>& angles, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw error(errc::invalid_argument, "ghz_point: p outside [0,1]");
  if (n < 1) throw error(errc::invalid_argument, "ghz_point: n < 1");
  const PlanarAngles th = angles ? *angles : default_ghz_angles(n);
  if (static_cast<int>(th.a.size()) != n || static_cast<int>(th.b.size()) != n ||
      static_cast<int>(th.c.size()) != n) {
    throw error(errc::dimension_mismatch, "ghz_point: angle counts");
  }
  Tensor3 q = Tensor3::zero(n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      for (int z = 0; z < n; ++z) q(x, y, z) = p * std::cos(th.a[x] + th.b[y] + th.c[z]);
    }
  }
  return q;
}

struct DeterministicStrategy {
  std::vector<int> a, b, c;  // c empty for two parties
};

struct OracleResult {
  double value = 0.0;
  DeterministicStrategy strategy;
};

inline double evaluate(const Eigen::MatrixXd& w, const DeterministicStrategy& s) {
  double total = 0.0;
  for (Eigen::Index x = 0; x < w.rows(); ++x) {
    for (Eigen::Index y = 0; y < w.cols(); ++y) {
      total += w(x, y) * s.a[static_cast<std::size_t>(x)] * s.b[static_cast<std::size_t>(y)];
    }
  }
  return total;
}

inline double evaluate(const Tensor3& w, const DeterministicStrategy& s) {
  double total = 0.0;
  for (int x = 0; x < w.n; ++x) {
    for (int y = 0; y < w.n; ++y) {
      for (int z = 0; z < w.n; ++z) total += w(x, y, z) * s.a[x] * s.b[y] * s.c[z];
    }
  }
  return total;
}

inline Eigen::MatrixXd vertex(const DeterministicStrategy& s) {
  const auto n = static_cast<Eigen::Index>(s.a.size());
  Eigen::MatrixXd d(n, static_cast<Eigen::Index>(s.b.size()));
  for (Eigen::Index x = 0; x < d.rows(); ++x) {
    for (Eigen::Index y = 0; y < d.cols(); ++y) d(x, y) = s.a[static_cast<std::size_t>(x)] * s.b[static_cast<std::size_t>(y)];
  }
  return d;
}

inline Tensor3 vertex3(const DeterministicStrategy& s) {
  const int n = static_cast<int>(s.a.size());
  Tensor3 d = Tensor3::zero(n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      for (int z = 0; z < n; ++z) d(x, y, z) = s.a[x] * s.b[y] * s.c[z];
    }
  }
  return d;
}

namespace detail {

inline int sign_of(double v) { return v >= 0.0 ? 1 : -1; }

// Gray-code enumeration splits into fixed-size chunks so the reduction is
// independent of the worker count.
constexpr std::uint64_t kChunk = std::uint64_t{1} << 14;

inline std::uint64_t gray(std::uint64_t i) { return i ^ (i >> 1); }

struct ChunkBest {
  double value = -std::numeric_limits<double>::infinity();
  std::uint64_t code = 0;
};

inline bool better(double value, std::uint64_t code, const ChunkBest& best) {
  return value > best.value || (value == best.value && code < best.code);
}

// max over b in {+-1}^n with b_0 = +1 of sum_x |sum_y m(x,y) b_y|; bit (y-1)
// of the code set means b_y = -1. Scans Gray indices [begin, end).
inline ChunkBest scan_bipartite(const Eigen::MatrixXd& m, std::uint64_t begin, std::uint64_t end) {
  const Eigen::Index n = m.cols();
  ChunkBest best;
  std::uint64_t code = gray(begin);
  Eigen::VectorXd partial = m.col(0);
  for (Eigen::Index y = 1; y < n; ++y) {
    partial += ((code >> (y - 1)) & 1U) ? Eigen::VectorXd(-m.col(y)) : Eigen::VectorXd(m.col(y));
  }
  for (std::uint64_t i = begin;;) {
    const double value = partial.cwiseAbs().sum();
    if (better(value, code, best)) best = {value, code};
    if (++i >= end) break;
    const int bit = std::countr_zero(i);
    const Eigen::Index y = bit + 1;
    const bool was_negative = (code >> bit) & 1U;
    code ^= std::uint64_t{1} << bit;
    if (was_negative) {
      partial += 2.0 * m.col(y);
    } else {
      partial -= 2.0 * m.col(y);
    }
  }
  return best;
}

inline std::vector<int> signs_from_code(std::uint64_t code, int n) {
  std::vector<int> s(static_cast<std::size_t>(n), 1);
  for (int y = 1; y < n; ++y) s[static_cast<std::size_t>(y)] = ((code >> (y - 1)) & 1U) ? -1 : 1;
  return s;
}

inline ChunkBest reduce(const std::vector<ChunkBest>& parts) {
  ChunkBest best;
  for (const auto& p : parts) {
    if (better(p.value, p.code, best)) best = p;
  }
  return best;
}

}  // namespace detail

/// w = max_b sum_x |sum_y W_xy b_y| over 2^(n-1) sign vectors of Bob.
inline OracleResult bell2_exact_oracle(const Eigen::MatrixXd& w, int cap = 30) {
  const auto n = static_cast<int>(w.rows());
  if (w.cols() != n || n < 1) throw error(errc::dimension_mismatch, "bell2_exact_oracle: W must be square");
  if (n > cap) throw error(errc::budget_exceeded, "bell2_exact_oracle: n = " + std::to_string(n) + " above cap");
  const std::uint64_t total = std::uint64_t{1} << (n - 1);
  const std::uint64_t chunks = (total + detail::kChunk - 1) / detail::kChunk;
  const auto parts = map_chunks(chunks, [&](std::size_t c) {
    const std::uint64_t begin = c * detail::kChunk;
    return detail::scan_bipartite(w, begin, std::min(total, begin + detail::kChunk));
  });
  const detail::ChunkBest best = detail::reduce(parts);

  OracleResult out;
  out.strategy.b = detail::signs_from_code(best.code, n);
  Eigen::VectorXd b(n);
  for (int y = 0; y < n; ++y) b(y) = out.strategy.b[static_cast<std::size_t>(y)];
  const Eigen::VectorXd partial = w * b;
  for (int x = 0; x < n; ++x) out.strategy.a.push_back(detail::sign_of(partial(x)));
  out.value = evaluate(w, out.strategy);
  return out;
}

/// Alternating sign ascent from seeded random starts; restart i draws from
/// seed + i. The value is attained by the returned strategy.
inline OracleResult bell2_heuristic_oracle(const Eigen::MatrixXd& w, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw error(errc::invalid_argument, "restarts must be >= 1");
  const Eigen::Index n = w.rows();
  if (w.cols() != n) throw error(errc::dimension_mismatch, "bell2_heuristic_oracle: W must be square");
  OracleResult best;
  best.value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd a(n), b(n);
  for (int r = 0; r < restarts; ++r) {
    SplitMix64 rng(seed + static_cast<std::uint64_t>(r));
    for (Eigen::Index x = 0; x < n; ++x) a(x) = rng.sign();
    double value = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < 1000; ++it) {
      const Eigen::VectorXd colsum = w.transpose() * a;
      for (Eigen::Index y = 0; y < n; ++y) b(y) = detail::sign_of(colsum(y));
      const Eigen::VectorXd rowsum = w * b;
      for (Eigen::Index x = 0; x < n; ++x) a(x) = detail::sign_of(rowsum(x));
      const double next = a.dot(rowsum);
      if (!(next > value)) break;
      value = next;
    }
    if (value > best.value) {
      best.value = value;
      best.strategy.a.assign(a.data(), a.data() + n);
      best.strategy.b.assign(b.data(), b.data() + n);
    }
  }
  best.value = evaluate(w, best.strategy);
  return best;
}

/// w = max_{b,c} sum_x |sum_{y,z} W_xyz b_y c_z| with b_0 = c_0 = +1.
inline OracleResult bell3_exact_oracle(const Tensor3& w, int cap = 12) {
  const int n = w.n;
  if (n < 1) throw error(errc::invalid_argument, "bell3_exact_oracle: n < 1");
  if (n > cap) throw error(errc::budget_exceeded, "bell3_exact_oracle: n = " + std::to_string(n) + " above cap");
  const std::uint64_t per_party = std::uint64_t{1} << (n - 1);

  // M_c(x,y) = sum_z W(x,y,z) c_z for a given code of c
  auto contract = [&](std::uint64_t code) {
    const std::vector<int> c = detail::signs_from_code(code, n);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        double s = 0.0;
        for (int z = 0; z < n; ++z) s += w(x, y, z) * c[static_cast<std::size_t>(z)];
        m(x, y) = s;
      }
    }
    return m;
  };

  // one chunk per c code keeps the reduce order fixed
  const auto parts = map_chunks(per_party, [&](std::size_t ci) {
    const std::uint64_t code_c = detail::gray(ci);
    const Eigen::MatrixXd m = contract(code_c);
    detail::ChunkBest inner = detail::scan_bipartite(m, 0, per_party);
    inner.code |= code_c << (n - 1);
    return inner;
  });
  // codes are unique, so picking the smallest among ties is order-independent
  const detail::ChunkBest best = detail::reduce(parts);

  OracleResult out;
  const std::uint64_t mask = per_party - 1;
  out.strategy.b = detail::signs_from_code(best.code & mask, n);
  out.strategy.c = detail::signs_from_code(best.code >> (n - 1), n);
  for (int x = 0; x < n; ++x) {
    double t = 0.0;
    for (int y = 0; y < n; ++y) {
      for (int z = 0; z < n; ++z) t += w(x, y, z) * out.strategy.b[y] * out.strategy.c[z];
    }
    out.strategy.a.push_back(detail::sign_of(t));
  }
  out.value = evaluate(w, out.strategy);
  return out;
}

/// Cyclic coordinate ascent over the a, b, c sign vectors (in that order).
inline OracleResult bell3_heuristic_oracle(const Tensor3& w, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw error(errc::invalid_argument, "restarts must be >= 1");
  const int n = w.n;
  OracleResult best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<int> a(n), b(n), c(n);
  std::vector<double> acc(n);
  for (int r = 0; r < restarts; ++r) {
    SplitMix64 rng(seed + static_cast<std::uint64_t>(r));
    for (int i = 0; i < n; ++i) b[i] = rng.sign();
    for (int i = 0; i < n; ++i) c[i] = rng.sign();
    double value = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < 1000; ++it) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
          for (int z = 0; z < n; ++z) acc[x] += w(x, y, z) * b[y] * c[z];
      for (int x = 0; x < n; ++x) a[x] = detail::sign_of(acc[x]);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
          for (int z = 0; z < n; ++z) acc[y] += w(x, y, z) * a[x] * c[z];
      for (int y = 0; y < n; ++y) b[y] = detail::sign_of(acc[y]);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
          for (int z = 0; z < n; ++z) acc[z] += w(x, y, z) * a[x] * b[y];
      double next = 0.0;
      for (int z = 0; z < n; ++z) {
        c[z] = detail::sign_of(acc[z]);
        next += c[z] * acc[z];
      }
      if (!(next > value)) break;
      value = next;
    }
    if (value > best.value) {
      best.value = value;
      best.strategy = {a, b, c};
    }
  }
  best.value = evaluate(w, best.strategy);
  return best;
}

/// w / <Q(1), W>; requires the quantum value to exceed w.
inline double visibility_bound(const Point& w_flat, double local_bound, const Point& q_unit_flat) {
  require_same_dimension(w_flat, q_unit_flat, "visibility_bound");
  const double quantum = q_unit_flat.dot(w_flat);
  if (!(quantum > local_bound)) {
    throw error(errc::no_separation, "quantum value does not exceed the local bound");
  }
  return local_bound / quantum;
}

inline double visibility_bound(const Eigen::MatrixXd& w, double local_bound, const Eigen::MatrixXd& q_unit) {
  return visibility_bound(flatten(w), local_bound, flatten(q_unit));
}

inline double visibility_bound(const Tensor3& w, double local_bound, const Tensor3& q_unit) {
  return visibility_bound(w.data, local_bound, q_unit.data);
}

struct SeesawResult {
  BlochVectors vectors;
  double value = 0.0;
  int iterations = 0;
  std::vector<double> trace;  // value after every half-step
};

/// Maximizes -sum_xy W_xy a_x . b_y over unit vectors by alternating exact
/// updates of b and a. Starts from `start` when given, else from seeded
/// random vectors.
inline SeesawResult quantum_seesaw_2party(const Eigen::MatrixXd& w, const std::optional<BlochVectors>& start = {},
                                          std::uint64_t seed = 0, double tol = 1e-10, int max_iterations = 100000) {
  const auto n = static_cast<int>(w.rows());
  if (w.cols() != n) throw error(errc::dimension_mismatch, "quantum_seesaw_2party: W must be square");
  SeesawResult out;
  out.vectors = start ? *start : random_bloch_vectors(n, seed);
  if (out.vectors.settings() != n || static_cast<int>(out.vectors.b.size()) != n) {
    throw error(errc::dimension_mismatch, "quantum_seesaw_2party: vector count");
  }
  auto& a = out.vectors.a;
  auto& b = out.vectors.b;
  auto value = [&] {
    double v = 0.0;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) v -= w(x, y) * a[x].dot(b[y]);
    return v;
  };
  double current = value();
  for (int it = 0; it < max_iterations; ++it) {
    const double before = current;
    for (int y = 0; y < n; ++y) {
      Vec3 s = Vec3::Zero();
      for (int x = 0; x < n; ++x) s -= w(x, y) * a[x];
      if (s.norm() > 0.0) b[y] = s.normalized();
    }
    out.trace.push_back(value());
    for (int x = 0; x < n; ++x) {
      Vec3 s = Vec3::Zero();
      for (int y = 0; y < n; ++y) s -= w(x, y) * b[y];
      if (s.norm() > 0.0) a[x] = s.normalized();
    }
    current = value();
    out.trace.push_back(current);
    out.iterations = it + 1;
    if (std::abs(current - before) < tol) break;
  }
  out.value = current;
  return out;
}

/// Two-party correlation polytope as an oracle set over row-major n x n points.
class Bell2Polytope {
 public:
  explicit Bell2Polytope(int n, int exact_cap = 30, int restarts = 64) : n_(n), cap_(exact_cap), restarts_(restarts) {
    if (n < 1) throw error(errc::invalid_argument, "Bell2Polytope: n < 1");
  }

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(n_) * n_; }
  int settings() const { return n_; }
  bool exact_available() const { return n_ <= cap_; }

  OracleAnswer maximize(const Point& c) const { return answer(bell2_exact_oracle(shape(c), cap_), c, true); }

  OracleAnswer maximize_heuristic(const Point& c, std::uint64_t seed) const {
    return answer(bell2_heuristic_oracle(shape(c), restarts_, seed), c, false);
  }

 private:
  Eigen::MatrixXd shape(const Point& c) const {
    if (c.size() != dimension()) throw error(errc::dimension_mismatch, "Bell2Polytope");
    return unflatten(c, n_, n_);
  }

  static OracleAnswer answer(const OracleResult& r, const Point& c, bool exact) {
    OracleAnswer a;
    a.point = flatten(vertex(r.strategy));
    a.overlap = c.dot(a.point);
    a.exact = exact;
    return a;
  }

  int n_;
  int cap_;
  int restarts_;
};

/// Three-party correlation polytope over flat n^3 points.
class Bell3Polytope {
 public:
  explicit Bell3Polytope(int n, int exact_cap = 12, int restarts = 64) : n_(n), cap_(exact_cap), restarts_(restarts) {
    if (n < 1) throw error(errc::invalid_argument, "Bell3Polytope: n < 1");
  }

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(n_) * n_ * n_; }
  int settings() const { return n_; }
  bool exact_available() const { return n_ <= cap_; }

  OracleAnswer maximize(const Point& c) const { return answer(bell3_exact_oracle(shape(c), cap_), c, true); }

  OracleAnswer maximize_heuristic(const Point& c, std::uint64_t seed) const {
    return answer(bell3_heuristic_oracle(shape(c), restarts_, seed), c, false);
  }

 private:
  Tensor3 shape(const Point& c) const {
    if (c.size() != dimension()) throw error(errc::dimension_mismatch, "Bell3Polytope");
    return {n_, c};
  }

  static OracleAnswer answer(const OracleResult& r, const Point& c, bool exact) {
    OracleAnswer a;
    a.point = vertex3(r.strategy).data;
    a.overlap = c.dot(a.point);
    a.exact = exact;
    return a;
  }

  int n_;
  int cap_;
  int restarts_;
};

struct BellWitness {
  Eigen::MatrixXd w;  // bipartite functional
  double local_bound = 0.0;
  bool local_bound_exact = true;
  double quantum_value = 0.0;
  double visibility_bound = 0.0;
};

struct MeasurementConfig {
  double v_start = 1.0;
  double dv = 0.001;
  double v_floor = 0.70;
  long engine_iterations = 10000;
  int memory = 1;
  // consecutive non-separating rounds tolerated at one v before stopping
  int stall_rounds = 20;
  int exact_cap = 30;
  int heuristic_restarts = 64;
  OracleMode oracle_mode = OracleMode::exact;
  std::uint64_t seed = 0;
  std::optional<BlochVectors> initial;
};

struct MeasurementResult {
  BlochVectors vectors;
  BellWitness witness;
  double bound = 1.0;
  double final_v = 1.0;
  int rounds = 0;
};

/// Alternates engine runs on Q(v) with see-saw optimization of the
/// measurements for the resulting functional, lowering v by dv after every
/// round in which w < v * <Q(1), W> still holds. Returns the smallest
/// certified w / <Q(1), W> seen.
inline MeasurementResult optimize_measurements(int n, const MeasurementConfig& config) {
  if (n < 2) throw error(errc::invalid_argument, "optimize_measurements: n >= 2 required");
  if (!(config.dv > 0.0)) throw error(errc::invalid_argument, "optimize_measurements: dv must be positive");
  const Bell2Polytope polytope(n, config.exact_cap, config.heuristic_restarts);
  const bool exact_w = polytope.exact_available();

  BlochVectors vectors = config.initial ? *config.initial : random_bloch_vectors(n, config.seed);
  std::optional<MeasurementResult> best;
  double v = config.v_start;
  int stall = 0;
  int rounds = 0;
  bool ever_separated = false;

  while (v >= config.v_floor - 1e-12) {
    ++rounds;
    const Point r = flatten(werner_point(vectors, v));
    RunConfig rc;
    rc.max_iterations = config.engine_iterations;
    rc.memory = config.memory;
    rc.delta = 1e-12;
    rc.stop_on_witness = false;
    rc.oracle_mode = config.oracle_mode;
    if (!exact_w && rc.oracle_mode != OracleMode::exact) rc.oracle_mode = OracleMode::heuristic_only;
    rc.rng_seed = mix_seed(config.seed, static_cast<std::uint64_t>(rounds));
    const RunRecord rec = run(r, polytope, rc);

    bool separated = false;
    const Point diff = r - rec.final_point;
    if (diff.norm() > 0.0) {
      const Eigen::MatrixXd w = unflatten(diff / diff.norm(), n, n);
      const OracleResult local = exact_w ? bell2_exact_oracle(w, config.exact_cap)
                                         : bell2_heuristic_oracle(w, 16 * config.heuristic_restarts, rc.rng_seed);
      const SeesawResult quantum = quantum_seesaw_2party(w, vectors);
      vectors = quantum.vectors;
      if (quantum.value > local.value) {
        const double bound = local.value / quantum.value;
        if (!best || bound < best->bound) {
          MeasurementResult m;
          m.vectors = vectors;
          m.witness = {w, local.value, exact_w, quantum.value, bound};
          m.bound = bound;
          best = m;
        }
        separated = local.value < v * quantum.value;
      }
    }
    if (separated) {
      ever_separated = true;
      stall = 0;
      v -= config.dv;
    } else if (++stall > config.stall_rounds) {
      break;
    }
  }
  if (!best || !ever_separated) throw error(errc::stalled, "optimize_measurements: no separation before stopping");
  best->final_v = v;
  best->rounds = rounds;
  return *best;
}

}  // namespace gilbert::bell
