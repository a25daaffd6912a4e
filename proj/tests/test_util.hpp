#pragma once

#include "gilbert/core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace testutil {

using gilbert::Point;

inline Point random_point(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Point p(n);
  for (Eigen::Index i = 0; i < n; ++i) p(i) = normal(rng);
  return p;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline std::vector<int> signs_of(std::uint64_t bits, int n) {
  std::vector<int> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = ((bits >> i) & 1U) ? -1 : 1;
  return s;
}

// max over all a, b in {+-1}^n of sum W_xy a_x b_y, no shortcuts
inline double brute_bell2(const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(w.rows());
  double best = -INFINITY;
  for (std::uint64_t ab = 0; ab < (std::uint64_t{1} << n); ++ab) {
    const auto a = signs_of(ab, n);
    for (std::uint64_t bb = 0; bb < (std::uint64_t{1} << n); ++bb) {
      const auto b = signs_of(bb, n);
      double v = 0.0;
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) v += w(x, y) * a[x] * b[y];
      best = std::max(best, v);
    }
  }
  return best;
}

// max over a of the largest eigenvalue of sum_x a_x W_x . sigma, via a generic
// Hermitian eigensolver on the 2 x 2 matrix
inline double brute_steering(const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(w.rows());
  using C = std::complex<double>;
  double best = -INFINITY;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    const auto a = signs_of(bits, n);
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    for (int x = 0; x < n; ++x) {
      const double s = a[x];
      m(0, 1) += s * C(w(x, 0), -w(x, 1));
      m(1, 0) += s * C(w(x, 0), w(x, 1));
      m(0, 0) += s * w(x, 2);
      m(1, 1) -= s * w(x, 2);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m);
    best = std::max(best, es.eigenvalues()(1));
  }
  return best;
}

// Distance from r to conv(columns) by trying every support subset: solve the
// affine least-squares problem on the subset and keep feasible solutions.
inline double brute_hull_distance(const Eigen::MatrixXd& a, const Point& r) {
  const auto m = static_cast<int>(a.cols());
  double best = INFINITY;
  for (std::uint32_t mask = 1; mask < (1U << m); ++mask) {
    std::vector<int> idx;
    for (int j = 0; j < m; ++j)
      if ((mask >> j) & 1U) idx.push_back(j);
    const auto k = static_cast<Eigen::Index>(idx.size());
    // min |a0 + sum_{i>0} t_i (a_i - a0) - r|
    const Point a0 = a.col(idx[0]);
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(k);
    if (k == 1) {
      weights(0) = 1.0;
    } else {
      Eigen::MatrixXd b(a.rows(), k - 1);
      for (Eigen::Index i = 1; i < k; ++i) b.col(i - 1) = a.col(idx[static_cast<std::size_t>(i)]) - a0;
      const Eigen::VectorXd t = b.completeOrthogonalDecomposition().solve(r - a0);
      weights.tail(k - 1) = t;
      weights(0) = 1.0 - t.sum();
    }
    if (weights.minCoeff() < -1e-12) continue;
    Point p = Point::Zero(a.rows());
    for (Eigen::Index i = 0; i < k; ++i) p += weights(i) * a.col(idx[static_cast<std::size_t>(i)]);
    best = std::min(best, (p - r).norm());
  }
  return best;
}

}  // namespace testutil
