#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gilbert {

/// Dense real vector in the ambient space of a convex set.
using Point = Eigen::VectorXd;

enum class errc {
  degenerate_direction,
  dimension_mismatch,
  exact_oracle_unavailable,
  non_convergence,
  budget_exceeded,
  no_separation,
  non_unit_vector,
  zero_direction,
  insufficient_data,
  stalled,
  invalid_argument,
};

inline const char* to_string(errc code) {
  switch (code) {
    case errc::degenerate_direction: return "DegenerateDirection";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::exact_oracle_unavailable: return "ExactOracleUnavailable";
    case errc::non_convergence: return "NonConvergence";
    case errc::budget_exceeded: return "BudgetExceeded";
    case errc::no_separation: return "NoSeparation";
    case errc::non_unit_vector: return "NonUnitVector";
    case errc::zero_direction: return "ZeroDirection";
    case errc::insufficient_data: return "InsufficientData";
    case errc::stalled: return "Stalled";
    case errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

/// Result of a linear maximization over S. `point` always lies in S; when
/// `exact` is false the overlap is only a lower bound on the true maximum.
struct OracleAnswer {
  Point point;
  double overlap = 0.0;
  bool exact = true;
};

inline void require_same_dimension(const Point& a, const Point& b, const char* where) {
  if (a.size() != b.size()) {
    throw error(errc::dimension_mismatch, std::string(where) + ": " + std::to_string(a.size()) +
                                              " vs " + std::to_string(b.size()));
  }
}

inline bool all_finite(const Point& p) { return p.allFinite(); }

// splitmix64 finalizer; used to fan a single seed out into independent streams.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Small counter-based generator for random signs in hot oracle loops.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  int sign() { return (next() >> 63) ? -1 : 1; }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace gilbert
