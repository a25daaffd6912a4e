#pragma once

// Euclidean projection of a point onto the convex hull of finitely many
// points:  min ||A x - r||  s.t.  x >= 0, sum(x) = 1.
//
// Solved with Wolfe's minimum-norm-point active-set method on the shifted
// columns a_j - r. The active set ("corral") is kept affinely independent, so
// the bordered KKT system solved in each minor cycle stays nonsingular even
// when the columns themselves are affinely dependent.

#include "gilbert/core.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

namespace gilbert {

struct HullProblem {
  Eigen::MatrixXd columns;  // one point per column
  Point target;
};

struct HullProjection {
  Eigen::VectorXd weights;
  Point point;
  double distance = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

struct ProjectionOptions {
  double tol = 1e-10;
  // Column to start the corral from. The engine passes the current iterate.
  std::optional<Eigen::Index> warm_start;
  // Iteration cap is cap_factor * column count.
  int cap_factor = 50;
};

/// max_j (r - p).(a_j - p) clipped below at zero, with p = A w.
inline double kkt_residual(const HullProblem& problem, const Eigen::VectorXd& weights) {
  if (weights.size() != problem.columns.cols()) {
    throw error(errc::dimension_mismatch, "kkt_residual: weight count");
  }
  const Point p = problem.columns * weights;
  const Point residual = problem.target - p;
  const double base = residual.dot(p);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < problem.columns.cols(); ++j) {
    worst = std::max(worst, residual.dot(problem.columns.col(j)) - base);
  }
  return worst;
}

namespace detail {

// Indices of the first occurrence of each column; duplicates (distance below
// 1e-12) map to their representative.
inline std::vector<Eigen::Index> unique_columns(const Eigen::MatrixXd& a) {
  constexpr double kDuplicate = 1e-12;
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(a.cols()));
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    bool dup = false;
    for (Eigen::Index i : keep) {
      // cheap reject on the first coordinate before the full distance
      if (std::abs(a(0, i) - a(0, j)) >= kDuplicate) continue;
      if ((a.col(i) - a.col(j)).squaredNorm() < kDuplicate * kDuplicate) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(j);
  }
  return keep;
}

}  // namespace detail

inline HullProjection project(const HullProblem& problem, const ProjectionOptions& options = {}) {
  const Eigen::Index m = problem.columns.cols();
  if (m < 1) throw error(errc::invalid_argument, "project: no columns");
  if (problem.columns.rows() != problem.target.size()) {
    throw error(errc::dimension_mismatch, "project: column dimension differs from target");
  }

  const std::vector<Eigen::Index> uniq = detail::unique_columns(problem.columns);
  const auto u = static_cast<Eigen::Index>(uniq.size());
  Eigen::MatrixXd shifted(problem.columns.rows(), u);
  for (Eigen::Index i = 0; i < u; ++i) shifted.col(i) = problem.columns.col(uniq[i]) - problem.target;

  double scale = 1.0;
  for (Eigen::Index i = 0; i < u; ++i) scale = std::max(scale, shifted.col(i).squaredNorm());
  const double gap_tol = options.tol * scale;

  Eigen::Index first = 0;
  if (options.warm_start && *options.warm_start >= 0 && *options.warm_start < m) {
    const auto it = std::find(uniq.begin(), uniq.end(), *options.warm_start);
    if (it != uniq.end()) {
      first = it - uniq.begin();
    } else {
      const Point start = problem.columns.col(*options.warm_start);
      for (Eigen::Index i = 0; i < u; ++i) {
        if ((problem.columns.col(uniq[i]) - start).squaredNorm() < 1e-24) {
          first = i;
          break;
        }
      }
    }
  } else {
    shifted.colwise().squaredNorm().minCoeff(&first);
  }

  // corral: indices into `shifted`, with convex weights and its Gram block
  std::vector<Eigen::Index> corral{first};
  Eigen::VectorXd lambda = Eigen::VectorXd::Ones(1);
  Eigen::MatrixXd gram(1, 1);
  gram(0, 0) = shifted.col(first).squaredNorm();
  Point x = shifted.col(first);

  const long cap = static_cast<long>(options.cap_factor) * std::max<Eigen::Index>(m, 1);
  long iterations = 0;
  bool stuck = false;

  auto drop = [&](std::size_t pos) {
    const auto s = static_cast<Eigen::Index>(corral.size());
    const auto p = static_cast<Eigen::Index>(pos);
    corral.erase(corral.begin() + static_cast<std::ptrdiff_t>(pos));
    Eigen::VectorXd l(s - 1);
    Eigen::MatrixXd g(s - 1, s - 1);
    for (Eigen::Index i = 0, ii = 0; i < s; ++i) {
      if (i == p) continue;
      l(ii) = lambda(i);
      for (Eigen::Index j = 0, jj = 0; j < s; ++j) {
        if (j == p) continue;
        g(ii, jj++) = gram(i, j);
      }
      ++ii;
    }
    lambda = std::move(l);
    gram = std::move(g);
  };

  while (true) {
    if (++iterations > cap) {
      throw error(errc::non_convergence, "project: iteration cap reached");
    }
    const Eigen::VectorXd dots = shifted.transpose() * x;
    Eigen::Index j = 0;
    const double best = dots.minCoeff(&j);
    if (x.squaredNorm() - best <= gap_tol) break;
    if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;

    const auto saved_corral = corral;
    const Eigen::VectorXd saved_lambda = lambda;
    const Eigen::MatrixXd saved_gram = gram;

    // enter j with zero weight
    const auto s = static_cast<Eigen::Index>(corral.size());
    Eigen::MatrixXd g(s + 1, s + 1);
    g.topLeftCorner(s, s) = gram;
    for (Eigen::Index i = 0; i < s; ++i) {
      const double v = shifted.col(corral[static_cast<std::size_t>(i)]).dot(shifted.col(j));
      g(i, s) = v;
      g(s, i) = v;
    }
    g(s, s) = shifted.col(j).squaredNorm();
    gram = std::move(g);
    corral.push_back(j);
    lambda.conservativeResize(s + 1);
    lambda(s) = 0.0;

    // minor cycles
    while (true) {
      if (++iterations > cap) {
        throw error(errc::non_convergence, "project: iteration cap reached");
      }
      const auto c = static_cast<Eigen::Index>(corral.size());
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(c + 1, c + 1);
      kkt.topLeftCorner(c, c) = gram;
      kkt.block(0, c, c, 1).setOnes();
      kkt.block(c, 0, 1, c).setOnes();
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(c + 1);
      rhs(c) = 1.0;
      const Eigen::VectorXd sol = kkt.colPivHouseholderQr().solve(rhs);
      const double resid = (kkt * sol - rhs).norm();
      if (!sol.allFinite() || resid > 1e-8) {
        // numerically affinely dependent corral; keep the last good point
        corral = saved_corral;
        lambda = saved_lambda;
        gram = saved_gram;
        stuck = true;
        break;
      }
      const Eigen::VectorXd alpha = sol.head(c);
      if (alpha.minCoeff() > 1e-15) {
        lambda = alpha;
        break;
      }
      double theta = 1.0;
      for (Eigen::Index i = 0; i < c; ++i) {
        if (alpha(i) <= 1e-15) {
          const double denom = lambda(i) - alpha(i);
          if (denom > 0.0) theta = std::min(theta, lambda(i) / denom);
        }
      }
      lambda = (1.0 - theta) * lambda + theta * alpha;
      // remove every vertex whose weight vanished (at least one does)
      Eigen::Index worst = 0;
      lambda.minCoeff(&worst);
      for (Eigen::Index i = c - 1; i >= 0; --i) {
        if (lambda(i) <= 1e-15 || i == worst) drop(static_cast<std::size_t>(i));
      }
      if (corral.empty()) {
        throw error(errc::non_convergence, "project: corral emptied");
      }
      lambda = lambda.cwiseMax(0.0);
      lambda /= lambda.sum();
    }

    const double before = x.squaredNorm();
    x.setZero();
    for (std::size_t i = 0; i < corral.size(); ++i) {
      x += lambda(static_cast<Eigen::Index>(i)) * shifted.col(corral[i]);
    }
    // the norm strictly decreases in exact arithmetic; no decrease means round-off floor
    if (stuck || x.squaredNorm() >= before) break;
  }

  HullProjection out;
  out.weights = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < corral.size(); ++i) {
    out.weights(uniq[static_cast<std::size_t>(corral[i])]) = lambda(static_cast<Eigen::Index>(i));
  }
  out.point = problem.columns * out.weights;
  out.distance = (out.point - problem.target).norm();
  out.kkt_residual = kkt_residual(problem, out.weights);
  out.iterations = static_cast<int>(iterations);
  return out;
}

}  // namespace gilbert
