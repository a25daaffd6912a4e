#pragma once

// Convex test sets with exact linear-optimization oracles and known geometry.

#include "gilbert/core.hpp"
#include "gilbert/simplex_projection.hpp"

#include <optional>
#include <random>
#include <vector>

namespace gilbert {

/// Geometric data used by the convergence bounds. `known_dstar` and
/// `boundary_gap` refer to a particular external point r.
struct SetMetadata {
  double diameter = 0.0;
  std::optional<double> known_dstar;
  std::optional<double> boundary_gap;
  // H_Q convention: R = 1 / (2 rho) for a ball of radius rho
  std::optional<double> curvature;
};

namespace detail {

inline Eigen::Index argmax_lowest(const Eigen::VectorXd& values) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = i;
  }
  return best;
}

}  // namespace detail

/// Axis-aligned box. Vertex i takes upper[j] where bit j of i is set.
class BoxSet {
 public:
  BoxSet(Point lower, Point upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    require_same_dimension(lower_, upper_, "BoxSet");
    if (lower_.size() == 0) throw error(errc::invalid_argument, "BoxSet: empty");
    if (!lower_.allFinite() || !upper_.allFinite() || (upper_.array() < lower_.array()).any()) {
      throw error(errc::invalid_argument, "BoxSet: bounds must be finite with lower <= upper");
    }
  }

  /// The rectangle [-1,1] x [-1,0] used by the convergence experiments.
  static BoxSet rectangle() { return BoxSet(Point{{-1.0, -1.0}}, Point{{1.0, 0.0}}); }

  Eigen::Index dimension() const { return lower_.size(); }
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }

  Point vertex(std::uint64_t index) const {
    Point v = lower_;
    for (Eigen::Index j = 0; j < v.size() && j < 64; ++j) {
      if ((index >> j) & 1U) v(j) = upper_(j);
    }
    return v;
  }

  OracleAnswer maximize(const Point& c) const {
    require_same_dimension(c, lower_, "box_oracle");
    OracleAnswer a;
    // ties keep the lower bound, i.e. the lowest vertex index
    a.point = (c.array() > 0.0).select(upper_, lower_);
    a.overlap = c.dot(a.point);
    a.exact = true;
    return a;
  }

  Point clamp(const Point& r) const { return r.cwiseMax(lower_).cwiseMin(upper_); }

  SetMetadata metadata(const Point& r) const {
    require_same_dimension(r, lower_, "BoxSet::metadata");
    SetMetadata m;
    m.diameter = (upper_ - lower_).norm();
    m.known_dstar = (r - clamp(r)).norm();
    if (*m.known_dstar == 0.0) {
      m.boundary_gap = std::min((r - lower_).minCoeff(), (upper_ - r).minCoeff());
    }
    return m;
  }

 private:
  Point lower_;
  Point upper_;
};

inline OracleAnswer box_oracle(const Point& c, const BoxSet& set) { return set.maximize(c); }

class BallSet {
 public:
  BallSet(Point center, double radius) : center_(std::move(center)), radius_(radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw error(errc::invalid_argument, "BallSet: radius must be > 0");
    if (center_.size() == 0) throw error(errc::invalid_argument, "BallSet: empty center");
  }

  static BallSet unit_disc() { return BallSet(Point::Zero(2), 1.0); }

  Eigen::Index dimension() const { return center_.size(); }
  const Point& center() const { return center_; }
  double radius() const { return radius_; }

  /// Zero directions return the center, which maximizes the zero functional.
  OracleAnswer maximize(const Point& c) const {
    require_same_dimension(c, center_, "ball_oracle");
    OracleAnswer a;
    const double n = c.norm();
    a.point = n > 0.0 ? Point(center_ + radius_ * c / n) : center_;
    a.overlap = c.dot(a.point);
    a.exact = true;
    return a;
  }

  SetMetadata metadata(const Point& r) const {
    require_same_dimension(r, center_, "BallSet::metadata");
    SetMetadata m;
    m.diameter = 2.0 * radius_;
    const double dist = (r - center_).norm();
    m.known_dstar = std::max(0.0, dist - radius_);
    if (dist < radius_) m.boundary_gap = radius_ - dist;
    m.curvature = 1.0 / (2.0 * radius_);
    return m;
  }

 private:
  Point center_;
  double radius_;
};

inline OracleAnswer ball_oracle(const Point& c, const BallSet& set) {
  if (c.norm() == 0.0) throw error(errc::zero_direction, "ball_oracle: zero direction");
  return set.maximize(c);
}

/// Convex hull of an explicit list of generators (one per column).
class HullSet {
 public:
  explicit HullSet(Eigen::MatrixXd generators) : generators_(std::move(generators)) {
    if (generators_.cols() == 0 || generators_.rows() == 0) throw error(errc::invalid_argument, "HullSet: empty");
  }

  static HullSet from_points(const std::vector<Point>& points) {
    if (points.empty()) throw error(errc::invalid_argument, "HullSet: empty");
    Eigen::MatrixXd g(points.front().size(), static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
      require_same_dimension(points.front(), points[i], "HullSet");
      g.col(static_cast<Eigen::Index>(i)) = points[i];
    }
    return HullSet(std::move(g));
  }

  Eigen::Index dimension() const { return generators_.rows(); }
  const Eigen::MatrixXd& generators() const { return generators_; }

  OracleAnswer maximize(const Point& c) const {
    if (c.size() != generators_.rows()) throw error(errc::dimension_mismatch, "hull_oracle");
    const Eigen::VectorXd values = generators_.transpose() * c;
    const Eigen::Index best = detail::argmax_lowest(values);
    return {generators_.col(best), values(best), true};
  }

  double diameter() const {
    double d = 0.0;
    for (Eigen::Index i = 0; i < generators_.cols(); ++i) {
      for (Eigen::Index j = i + 1; j < generators_.cols(); ++j) {
        d = std::max(d, (generators_.col(i) - generators_.col(j)).norm());
      }
    }
    return d;
  }

  SetMetadata metadata(const Point& r) const;

 private:
  Eigen::MatrixXd generators_;
};

inline OracleAnswer hull_oracle(const Point& c, const HullSet& set) { return set.maximize(c); }

/// dist(conv(generators), r) by projecting onto the full generator list.
inline double exact_hull_distance(const HullSet& set, const Point& r, double tol = 1e-12) {
  HullProblem problem{set.generators(), r};
  ProjectionOptions opts;
  opts.tol = tol;
  return project(problem, opts).distance;
}

inline SetMetadata HullSet::metadata(const Point& r) const {
  SetMetadata m;
  m.diameter = diameter();
  m.known_dstar = exact_hull_distance(*this, r);
  return m;
}

/// Cartesian product of small point sets placed on disjoint coordinate
/// blocks. Its hull is the product of the block hulls, so linear maximization
/// and projection both decompose block by block; a product of b two-point
/// blocks has 2^b generators without ever enumerating them.
class ProductHullSet {
 public:
  struct Block {
    Eigen::Index offset = 0;
    Eigen::MatrixXd choices;  // block_dim x number of choices
  };

  explicit ProductHullSet(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw error(errc::invalid_argument, "ProductHullSet: no blocks");
    Eigen::Index next = 0;
    for (const auto& b : blocks_) {
      if (b.offset != next || b.choices.cols() == 0 || b.choices.rows() == 0) {
        throw error(errc::invalid_argument, "ProductHullSet: blocks must tile the coordinates");
      }
      next += b.choices.rows();
    }
    dimension_ = next;
  }

  /// Seeded realization: `blocks` two-point blocks over `dimension`
  /// coordinates with standard normal endpoints (std::mt19937_64,
  /// construction version 1).
  static ProductHullSet seeded(Eigen::Index dimension, int blocks, std::uint64_t seed) {
    if (blocks < 1 || dimension < blocks) throw error(errc::invalid_argument, "ProductHullSet::seeded");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Block> out;
    const Eigen::Index base = dimension / blocks;
    const Eigen::Index extra = dimension % blocks;
    Eigen::Index offset = 0;
    for (int b = 0; b < blocks; ++b) {
      const Eigen::Index size = base + (b < extra ? 1 : 0);
      Block block{offset, Eigen::MatrixXd(size, 2)};
      for (Eigen::Index j = 0; j < 2; ++j) {
        for (Eigen::Index i = 0; i < size; ++i) block.choices(i, j) = normal(rng);
      }
      out.push_back(std::move(block));
      offset += size;
    }
    return ProductHullSet(std::move(out));
  }

  Eigen::Index dimension() const { return dimension_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  OracleAnswer maximize(const Point& c) const {
    if (c.size() != dimension_) throw error(errc::dimension_mismatch, "product hull oracle");
    OracleAnswer a;
    a.point.resize(dimension_);
    for (const auto& b : blocks_) {
      const Eigen::VectorXd values = b.choices.transpose() * c.segment(b.offset, b.choices.rows());
      a.point.segment(b.offset, b.choices.rows()) = b.choices.col(detail::argmax_lowest(values));
    }
    a.overlap = c.dot(a.point);
    a.exact = true;
    return a;
  }

  /// Generator with the given per-block choice indices.
  Point generator(const std::vector<Eigen::Index>& choice) const {
    Point p(dimension_);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const auto& b = blocks_[i];
      p.segment(b.offset, b.choices.rows()) = b.choices.col(choice.at(i));
    }
    return p;
  }

  /// Nearest point of the hull to r, computed block by block.
  Point nearest_point(const Point& r) const {
    if (r.size() != dimension_) throw error(errc::dimension_mismatch, "product hull projection");
    Point p(dimension_);
    for (const auto& b : blocks_) {
      HullProblem problem{b.choices, r.segment(b.offset, b.choices.rows())};
      ProjectionOptions opts;
      opts.tol = 1e-14;
      p.segment(b.offset, b.choices.rows()) = project(problem, opts).point;
    }
    return p;
  }

  double exact_distance(const Point& r) const { return (r - nearest_point(r)).norm(); }

  SetMetadata metadata(const Point& r) const {
    SetMetadata m;
    double d2 = 0.0;
    for (const auto& b : blocks_) {
      double block = 0.0;
      for (Eigen::Index i = 0; i < b.choices.cols(); ++i) {
        for (Eigen::Index j = i + 1; j < b.choices.cols(); ++j) {
          block = std::max(block, (b.choices.col(i) - b.choices.col(j)).squaredNorm());
        }
      }
      d2 += block;
    }
    m.diameter = std::sqrt(d2);
    m.known_dstar = exact_distance(r);
    return m;
  }

 private:
  std::vector<Block> blocks_;
  Eigen::Index dimension_ = 0;
};

}  // namespace gilbert
