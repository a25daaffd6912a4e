#pragma once

// CSV traces, JSON artifacts and JSON-described sets/points for the CLI.

#include "gilbert/bell_polytope.hpp"
#include "gilbert/convex_sets.hpp"
#include "gilbert/engine.hpp"
#include "gilbert/steering_set.hpp"

#include <json.hpp>

#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <string>

namespace gilbert {

using json = nlohmann::json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kTraceHeader = "k,d_k,epsilon_k,overlap,wallclock_us";

/// One row per iteration; absent epsilon/overlap fields are left empty. With
/// `wallclock` false the last column is written empty so traces compare
/// byte for byte.
inline void write_trace_csv(std::ostream& out, const RunRecord& record, bool wallclock = true) {
  out << kTraceHeader << '\n';
  for (const RunRow& row : record.rows) {
    out << row.k << ',' << format_double(row.d) << ',';
    if (row.epsilon) out << format_double(*row.epsilon);
    out << ',';
    if (row.overlap) out << format_double(*row.overlap);
    out << ',';
    if (wallclock) out << row.wallclock_us;
    out << '\n';
  }
}

inline json to_json(const Point& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

inline Point point_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Point>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index x = 0; x < m.rows(); ++x) {
    json row = json::array();
    for (Eigen::Index y = 0; y < m.cols(); ++y) row.push_back(m(x, y));
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw error(errc::invalid_argument, "empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t x = 0; x < rows.size(); ++x) {
    if (rows[x].size() != rows.front().size()) throw error(errc::dimension_mismatch, "ragged matrix");
    for (std::size_t y = 0; y < rows[x].size(); ++y) m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = rows[x][y];
  }
  return m;
}

inline json witness_json(const Witness& w) {
  return {{"dimension", w.c.size()},
          {"c", to_json(w.c)},
          {"local_bound", w.local_bound},
          {"value_at_r", w.value_at_r},
          {"margin", w.margin}};
}

inline json bell_witness_json(const bell::BellWitness& w) {
  return {{"shape", {w.w.rows(), w.w.cols()}},
          {"W", to_json(w.w)},
          {"local_bound", w.local_bound},
          {"local_bound_exact", w.local_bound_exact},
          {"quantum_value", w.quantum_value},
          {"visibility_bound", w.visibility_bound}};
}

inline json tensor_json(const bell::Tensor3& t) {
  json out = json::array();
  for (int x = 0; x < t.n; ++x) {
    json plane = json::array();
    for (int y = 0; y < t.n; ++y) {
      json row = json::array();
      for (int z = 0; z < t.n; ++z) row.push_back(t(x, y, z));
      plane.push_back(row);
    }
    out.push_back(plane);
  }
  return out;
}

inline json vectors_json(const std::vector<Eigen::Vector3d>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back({v(0), v(1), v(2)});
  return out;
}

inline std::vector<Eigen::Vector3d> vectors_from_json(const json& j) {
  std::vector<Eigen::Vector3d> out;
  for (const auto& item : j) {
    const auto v = item.get<std::vector<double>>();
    if (v.size() != 3) throw error(errc::dimension_mismatch, "direction must have 3 components");
    out.emplace_back(v[0], v[1], v[2]);
  }
  return out;
}

inline json measurements_json(const bell::BlochVectors& m) {
  return {{"n", m.settings()}, {"a", vectors_json(m.a)}, {"b", vectors_json(m.b)}};
}

inline bell::BlochVectors measurements_from_json(const json& j) {
  bell::BlochVectors m{vectors_from_json(j.at("a")), vectors_from_json(j.at("b"))};
  if (j.contains("n") && j.at("n").get<int>() != m.settings()) {
    throw error(errc::dimension_mismatch, "measurement count does not match n");
  }
  bell::check_unit(m.a, "measurements");
  bell::check_unit(m.b, "measurements");
  return m;
}

struct SteeringWitness {
  Eigen::MatrixXd w;  // n x 3
  double unsteerable_bound = 0.0;
  bool bound_exact = true;
  double quantum_value = 0.0;
  double v_bound = 0.0;
};

inline json steering_witness_json(const SteeringWitness& w) {
  return {{"n", w.w.rows()},
          {"W", to_json(w.w)},
          {"unsteerable_bound", w.unsteerable_bound},
          {"bound_certification", w.bound_exact ? "exact" : "heuristic"},
          {"quantum_value", w.quantum_value},
          {"v_bound", w.v_bound}};
}

/// Type-erased oracle set so the CLI can run any JSON-described set.
class AnySet {
 public:
  template <class S>
  explicit AnySet(S set, std::string name) : name_(std::move(name)) {
    auto shared = std::make_shared<S>(std::move(set));
    dimension_ = shared->dimension();
    exact_available_ = exact_oracle_available(*shared);
    maximize_ = [shared](const Point& c) { return shared->maximize(c); };
    if constexpr (HeuristicOracleSet<S>) {
      heuristic_ = [shared](const Point& c, std::uint64_t seed) { return shared->maximize_heuristic(c, seed); };
    }
    if constexpr (requires { shared->metadata(Point{}); }) {
      metadata_ = [shared](const Point& r) { return shared->metadata(r); };
    }
  }

  const std::string& name() const { return name_; }
  Eigen::Index dimension() const { return dimension_; }
  bool exact_available() const { return exact_available_; }
  bool has_heuristic() const { return static_cast<bool>(heuristic_); }

  OracleAnswer maximize(const Point& c) const { return maximize_(c); }

  OracleAnswer maximize_heuristic(const Point& c, std::uint64_t seed) const {
    if (!heuristic_) throw error(errc::invalid_argument, name_ + " has no heuristic oracle");
    return heuristic_(c, seed);
  }

  std::optional<SetMetadata> metadata(const Point& r) const {
    if (!metadata_) return std::nullopt;
    return metadata_(r);
  }

 private:
  std::string name_;
  Eigen::Index dimension_ = 0;
  bool exact_available_ = true;
  std::function<OracleAnswer(const Point&)> maximize_;
  std::function<OracleAnswer(const Point&, std::uint64_t)> heuristic_;
  std::function<SetMetadata(const Point&)> metadata_;
};

/// {"type": ..., "parameters": {...}, "seed": u64}
inline AnySet set_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  const json params = j.value("parameters", json::object());
  const auto seed = j.value("seed", std::uint64_t{0});
  if (type == "rectangle") return AnySet(BoxSet::rectangle(), type);
  if (type == "box") return AnySet(BoxSet(point_from_json(params.at("lower")), point_from_json(params.at("upper"))), type);
  if (type == "disc") return AnySet(BallSet::unit_disc(), type);
  if (type == "ball") {
    return AnySet(BallSet(point_from_json(params.at("center")), params.at("radius").get<double>()), type);
  }
  if (type == "hull") {
    std::vector<Point> pts;
    for (const auto& p : params.at("points")) pts.push_back(point_from_json(p));
    return AnySet(HullSet::from_points(pts), type);
  }
  if (type == "product_hull") {
    return AnySet(ProductHullSet::seeded(params.at("dimension").get<Eigen::Index>(), params.at("blocks").get<int>(), seed),
                  type);
  }
  if (type == "bell2") {
    return AnySet(bell::Bell2Polytope(params.at("n").get<int>(), params.value("exact_cap", 30), params.value("restarts", 64)),
                  type);
  }
  if (type == "bell3") {
    return AnySet(bell::Bell3Polytope(params.at("n").get<int>(), params.value("exact_cap", 12), params.value("restarts", 64)),
                  type);
  }
  if (type == "steering") {
    return AnySet(steering::SteeringSet(params.at("n").get<int>(), params.value("exact_cap", 24),
                                        params.value("restarts", 100)),
                  type);
  }
  throw error(errc::invalid_argument, "unknown set type '" + type + "'");
}

/// A plain array, or {"werner": {...}}, {"ghz": {...}}, {"steering": {...}}.
inline Point point_from_spec(const json& j, std::uint64_t seed = 0) {
  if (j.is_array()) return point_from_json(j);
  if (j.contains("werner")) {
    const json& w = j.at("werner");
    bell::BlochVectors m;
    if (w.contains("measurements")) {
      m = measurements_from_json(w.at("measurements"));
    } else if (w.value("chsh", false)) {
      const double h = 1.0 / std::sqrt(2.0);
      m.a = {{1, 0, 0}, {0, 0, 1}};
      m.b = {{h, 0, h}, {h, 0, -h}};
    } else {
      m = bell::random_bloch_vectors(w.at("n").get<int>(), w.value("seed", seed));
    }
    return bell::flatten(bell::werner_point(m, w.at("v").get<double>()));
  }
  if (j.contains("ghz")) {
    const json& g = j.at("ghz");
    return bell::ghz_point(g.at("n").get<int>(), std::nullopt, g.at("p").get<double>()).data;
  }
  if (j.contains("steering")) {
    const json& s = j.at("steering");
    const auto dirs = (!s.contains("directions") || s.at("directions") == "buckyball")
                          ? steering::buckyball_directions()
                          : vectors_from_json(s.at("directions"));
    return steering::steering_point(dirs, s.at("v").get<double>());
  }
  throw error(errc::invalid_argument, "unrecognized point specification");
}

inline OracleMode oracle_mode_from_string(const std::string& s) {
  if (s == "exact") return OracleMode::exact;
  if (s == "heuristic") return OracleMode::heuristic;
  if (s == "heuristic_only") return OracleMode::heuristic_only;
  throw error(errc::invalid_argument, "unknown oracle mode '" + s + "'");
}

/// Fields of RunConfig by name; missing keys keep the defaults.
inline RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  c.delta = j.value("delta", c.delta);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.memory = j.value("memory", c.memory);
  c.stop_tolerance = j.value("stop_tolerance", c.stop_tolerance);
  c.plateau_window = j.value("plateau_window", c.plateau_window);
  c.witness_slack = j.value("witness_slack", c.witness_slack);
  c.projection_tol = j.value("projection_tol", c.projection_tol);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.stop_on_witness = j.value("stop_on_witness", c.stop_on_witness);
  if (j.contains("oracle_mode")) c.oracle_mode = oracle_mode_from_string(j.at("oracle_mode").get<std::string>());
  validate(c);
  return c;
}

}  // namespace gilbert
