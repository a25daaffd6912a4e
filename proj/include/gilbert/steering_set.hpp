#pragma once

// Steering of two-qubit Werner states with Pauli measurements on the trusted
// side. Points are n x 3 arrays flattened row-major; the unsteerable set is
// the hull of a (x) m over sign vectors a and unit Bloch vectors m.

#include "gilbert/core.hpp"
#include "gilbert/parallel.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

namespace gilbert::steering {

using Vec3 = Eigen::Vector3d;

/// The 60 truncated-icosahedron vertices reduced modulo inversion: each kept
/// vector has a positive first nonzero coordinate. Sorted lexicographically.
inline std::vector<Vec3> buckyball_directions() {
  const double phi = std::numbers::phi;
  const std::array<Vec3, 3> families = {Vec3(0.0, 1.0, 3.0 * phi), Vec3(1.0, 2.0 + phi, 2.0 * phi),
                                        Vec3(phi, 2.0, 2.0 * phi + 1.0)};
  std::vector<Vec3> all;
  for (const Vec3& f : families) {
    for (int signs = 0; signs < 8; ++signs) {
      Vec3 v = f;
      for (int j = 0; j < 3; ++j) {
        if ((signs >> j) & 1) v(j) = -v(j);
      }
      for (int shift = 0; shift < 3; ++shift) {
        const Vec3 p(v((0 + shift) % 3), v((1 + shift) % 3), v((2 + shift) % 3));
        const Vec3 u = p.normalized();
        const bool seen = std::any_of(all.begin(), all.end(), [&](const Vec3& q) { return (q - u).norm() < 1e-9; });
        if (!seen) all.push_back(u);
      }
    }
  }
  std::vector<Vec3> out;
  for (const Vec3& u : all) {
    int j = 0;
    while (j < 3 && std::abs(u(j)) < 1e-12) ++j;
    if (j < 3 && u(j) > 0.0) out.push_back(u);
  }
  std::sort(out.begin(), out.end(), [](const Vec3& a, const Vec3& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  return out;
}

inline Point flatten_rows(const std::vector<Vec3>& rows) {
  Point p(static_cast<Eigen::Index>(rows.size()) * 3);
  for (std::size_t x = 0; x < rows.size(); ++x) p.segment<3>(static_cast<Eigen::Index>(3 * x)) = rows[x];
  return p;
}

inline Eigen::MatrixXd as_matrix(const Point& flat) {
  if (flat.size() % 3 != 0) throw error(errc::dimension_mismatch, "steering point size not a multiple of 3");
  Eigen::MatrixXd m(flat.size() / 3, 3);
  for (Eigen::Index x = 0; x < m.rows(); ++x) m.row(x) = flat.segment<3>(3 * x).transpose();
  return m;
}

inline Point as_flat(const Eigen::MatrixXd& m) {
  if (m.cols() != 3) throw error(errc::dimension_mismatch, "steering array must have 3 columns");
  Point p(m.rows() * 3);
  for (Eigen::Index x = 0; x < m.rows(); ++x) p.segment<3>(3 * x) = m.row(x).transpose();
  return p;
}

/// Q_x = -v a_x, flattened row-major.
inline Point steering_point(const std::vector<Vec3>& directions, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw error(errc::invalid_argument, "steering_point: v outside [0,1]");
  Point q(static_cast<Eigen::Index>(directions.size()) * 3);
  for (std::size_t x = 0; x < directions.size(); ++x) {
    if (!(std::abs(directions[x].norm() - 1.0) <= 1e-12)) {
      throw error(errc::non_unit_vector, "steering_point: direction " + std::to_string(x));
    }
    q.segment<3>(static_cast<Eigen::Index>(3 * x)) = -v * directions[x];
  }
  return q;
}

/// Qubit state psi = (re0 + i im0, re1 + i im1).
struct QubitState {
  std::array<double, 4> psi{1.0, 0.0, 0.0, 0.0};

  double norm() const { return std::sqrt(psi[0] * psi[0] + psi[1] * psi[1] + psi[2] * psi[2] + psi[3] * psi[3]); }

  /// (<sx>, <sy>, <sz>)
  Vec3 bloch() const {
    const double re = psi[0] * psi[2] + psi[1] * psi[3];  // Re(conj(p0) p1)
    const double im = psi[0] * psi[3] - psi[1] * psi[2];  // Im(conj(p0) p1)
    return {2.0 * re, 2.0 * im, psi[0] * psi[0] + psi[1] * psi[1] - psi[2] * psi[2] - psi[3] * psi[3]};
  }

  /// Top eigenvector of m . sigma for unit m; m = 0 gives |0>.
  static QubitState from_bloch(const Vec3& m) {
    const double n = m.norm();
    if (n == 0.0) return {};
    const Vec3 u = m / n;
    const double theta = std::acos(std::clamp(u(2), -1.0, 1.0));
    const double phi = std::atan2(u(1), u(0));
    QubitState s;
    s.psi = {std::cos(theta / 2.0), 0.0, std::sin(theta / 2.0) * std::cos(phi), std::sin(theta / 2.0) * std::sin(phi)};
    return s;
  }
};

struct UnsteerableVertex {
  std::vector<int> a;
  QubitState psi;
};

/// Row x = a_x * bloch(psi).
inline Point unsteerable_vertex_point(const UnsteerableVertex& vertex) {
  if (!(std::abs(vertex.psi.norm() - 1.0) <= 1e-12)) throw error(errc::non_unit_vector, "psi not normalized");
  const Vec3 m = vertex.psi.bloch();
  Point p(static_cast<Eigen::Index>(vertex.a.size()) * 3);
  for (std::size_t x = 0; x < vertex.a.size(); ++x) p.segment<3>(static_cast<Eigen::Index>(3 * x)) = vertex.a[x] * m;
  return p;
}

struct OracleResult {
  double value = 0.0;
  UnsteerableVertex vertex;
};

namespace detail {

constexpr std::uint64_t kChunk = std::uint64_t{1} << 16;

inline Eigen::MatrixXd rows_of(const Point& w) {
  if (w.size() % 3 != 0 || w.size() == 0) throw error(errc::dimension_mismatch, "steering functional must be n x 3");
  return as_matrix(w);
}

inline OracleResult finish(const Eigen::MatrixXd& w, std::vector<int> a) {
  Vec3 m = Vec3::Zero();
  for (Eigen::Index x = 0; x < w.rows(); ++x) m += a[static_cast<std::size_t>(x)] * w.row(x).transpose();
  OracleResult r;
  r.value = m.norm();
  r.vertex.a = std::move(a);
  r.vertex.psi = QubitState::from_bloch(m);
  return r;
}

}  // namespace detail

/// w = max_a lambda_max(sum_x a_x W_x . sigma) = max_a |sum_x a_x W_x| over
/// 2^(n-1) sign vectors (a_0 = +1; the global flip is absorbed by psi).
inline OracleResult steering_exact_oracle(const Point& w_flat, int cap = 24) {
  const Eigen::MatrixXd w = detail::rows_of(w_flat);
  const auto n = static_cast<int>(w.rows());
  if (n > cap) throw error(errc::budget_exceeded, "steering_exact_oracle: n = " + std::to_string(n) + " above cap");
  const std::uint64_t total = std::uint64_t{1} << (n - 1);
  const std::uint64_t chunks = (total + detail::kChunk - 1) / detail::kChunk;
  const Eigen::MatrixXd twice = 2.0 * w;

  struct Best {
    double value = -1.0;
    std::uint64_t code = 0;
  };
  const auto parts = map_chunks(chunks, [&](std::size_t c) {
    const std::uint64_t begin = c * detail::kChunk;
    const std::uint64_t end = std::min(total, begin + detail::kChunk);
    std::uint64_t code = begin ^ (begin >> 1);
    double s0 = w(0, 0), s1 = w(0, 1), s2 = w(0, 2);
    for (int x = 1; x < n; ++x) {
      const double sgn = ((code >> (x - 1)) & 1U) ? -1.0 : 1.0;
      s0 += sgn * w(x, 0);
      s1 += sgn * w(x, 1);
      s2 += sgn * w(x, 2);
    }
    Best best;
    for (std::uint64_t i = begin;;) {
      const double value = s0 * s0 + s1 * s1 + s2 * s2;
      if (value > best.value) best = {value, code};
      if (++i >= end) break;
      const int bit = std::countr_zero(i);
      const bool was_negative = (code >> bit) & 1U;
      code ^= std::uint64_t{1} << bit;
      const double sgn = was_negative ? 1.0 : -1.0;
      s0 += sgn * twice(bit + 1, 0);
      s1 += sgn * twice(bit + 1, 1);
      s2 += sgn * twice(bit + 1, 2);
    }
    return best;
  });
  Best best;
  for (const Best& p : parts) {
    if (p.value > best.value || (p.value == best.value && p.code < best.code)) best = p;
  }
  std::vector<int> a(static_cast<std::size_t>(n), 1);
  for (int x = 1; x < n; ++x) a[static_cast<std::size_t>(x)] = ((best.code >> (x - 1)) & 1U) ? -1 : 1;
  return detail::finish(w, std::move(a));
}

struct SeesawTrace {
  std::vector<double> lambdas;  // lambda_max after every update of a
};

/// One see-saw restart from the sign vector `a`; records lambda_max per step
/// when `trace` is given.
inline OracleResult steering_seesaw_restart(const Eigen::MatrixXd& w, std::vector<int> a, SeesawTrace* trace = nullptr,
                                            int max_iterations = 1000, double tol = 1e-12) {
  const Eigen::Index n = w.rows();
  Vec3 m = Vec3::Zero();
  for (Eigen::Index x = 0; x < n; ++x) m += a[static_cast<std::size_t>(x)] * w.row(x).transpose();
  double lambda = m.norm();
  if (trace) trace->lambdas.push_back(lambda);
  for (int it = 0; it < max_iterations; ++it) {
    // psi is the top eigenvector of m . sigma, so <psi| W_x . sigma |psi> = W_x . m / |m|
    Vec3 next = Vec3::Zero();
    for (Eigen::Index x = 0; x < n; ++x) {
      const int s = w.row(x).dot(m) > 0.0 ? 1 : -1;
      a[static_cast<std::size_t>(x)] = s;
      next += s * w.row(x).transpose();
    }
    m = next;
    const double updated = m.norm();
    if (trace) trace->lambdas.push_back(updated);
    const bool done = std::abs(updated - lambda) < tol;
    lambda = updated;
    if (done) break;
  }
  return detail::finish(w, std::move(a));
}

/// Best of `restarts` see-saw runs; restart i starts from random signs drawn
/// with seed + i. The value is attained by the returned vertex.
inline OracleResult steering_seesaw_oracle(const Point& w_flat, int restarts = 100, std::uint64_t seed = 0) {
  if (restarts < 1) throw error(errc::invalid_argument, "restarts must be >= 1");
  const Eigen::MatrixXd w = detail::rows_of(w_flat);
  OracleResult best;
  best.value = -1.0;
  for (int r = 0; r < restarts; ++r) {
    SplitMix64 rng(seed + static_cast<std::uint64_t>(r));
    std::vector<int> a(static_cast<std::size_t>(w.rows()));
    for (auto& s : a) s = rng.sign();
    OracleResult candidate = steering_seesaw_restart(w, std::move(a));
    if (candidate.value > best.value) best = std::move(candidate);
  }
  return best;
}

/// tr(Q(v=1) W^t) = -sum_x a_x . W_x
inline double quantum_value(const std::vector<Vec3>& directions, const Point& w_flat) {
  return steering_point(directions, 1.0).dot(w_flat);
}

inline double steering_bound(double w, double quantum) {
  if (!(quantum > w)) throw error(errc::no_separation, "quantum value does not exceed the unsteerable value");
  return w / quantum;
}

/// Unsteerable set for n settings as an oracle set.
class SteeringSet {
 public:
  explicit SteeringSet(int n, int exact_cap = 24, int restarts = 100) : n_(n), cap_(exact_cap), restarts_(restarts) {
    if (n < 1) throw error(errc::invalid_argument, "SteeringSet: n < 1");
  }

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(n_) * 3; }
  int settings() const { return n_; }
  bool exact_available() const { return n_ <= cap_; }

  OracleAnswer maximize(const Point& c) const { return answer(steering_exact_oracle(check(c), cap_), c, true); }

  OracleAnswer maximize_heuristic(const Point& c, std::uint64_t seed) const {
    return answer(steering_seesaw_oracle(check(c), restarts_, seed), c, false);
  }

 private:
  const Point& check(const Point& c) const {
    if (c.size() != dimension()) throw error(errc::dimension_mismatch, "SteeringSet");
    return c;
  }

  static OracleAnswer answer(const OracleResult& r, const Point& c, bool exact) {
    OracleAnswer a;
    a.point = unsteerable_vertex_point(r.vertex);
    a.overlap = c.dot(a.point);
    a.exact = exact;
    return a;
  }

  int n_;
  int cap_;
  int restarts_;
};

}  // namespace gilbert::steering
