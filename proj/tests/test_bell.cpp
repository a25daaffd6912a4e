#include "gilbert/bell_polytope.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace gilbert;
using namespace gilbert::bell;

namespace {

const double kH = 1.0 / std::sqrt(2.0);

BlochVectors chsh_vectors() { return {{{1, 0, 0}, {0, 0, 1}}, {{kH, 0, kH}, {kH, 0, -kH}}}; }

Eigen::MatrixXd chsh() {
  Eigen::MatrixXd w(2, 2);
  w << 1, 1, 1, -1;
  return w;
}

Tensor3 random_tensor(std::mt19937_64& rng, int n) { return {n, testutil::random_point(rng, n * n * n)}; }

double brute_bell3(const Tensor3& w) {
  const int n = w.n;
  double best = -INFINITY;
  for (std::uint64_t ab = 0; ab < (1U << n); ++ab)
    for (std::uint64_t bb = 0; bb < (1U << n); ++bb)
      for (std::uint64_t cb = 0; cb < (1U << n); ++cb) {
        DeterministicStrategy s{testutil::signs_of(ab, n), testutil::signs_of(bb, n), testutil::signs_of(cb, n)};
        best = std::max(best, evaluate(w, s));
      }
  return best;
}

}  // namespace

TEST(WernerPoint, Examples) {
  const BlochVectors one{{{0, 0, 1}}, {{0, 0, 1}}};
  EXPECT_DOUBLE_EQ(werner_point(one, 1.0)(0, 0), -1.0);
  EXPECT_EQ(werner_point(chsh_vectors(), 0.0).norm(), 0.0);
  const auto q = werner_point(chsh_vectors(), 1.0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) EXPECT_NEAR(std::abs(q(x, y)), kH, 1e-15);
}

TEST(WernerPoint, Errors) {
  const BlochVectors bad{{{0, 0, 1.1}}, {{0, 0, 1}}};
  try {
    werner_point(bad, 0.5);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::non_unit_vector);
  }
  EXPECT_THROW(werner_point(chsh_vectors(), 1.5), error);
}

TEST(GhzPoint, Examples) {
  EXPECT_DOUBLE_EQ(ghz_point(4, std::nullopt, 0.7)(0, 0, 0), 0.7);
  EXPECT_NEAR(ghz_point(4, std::nullopt, 0.7)(0, 0, 2), 0.0, 1e-15);
  EXPECT_NEAR(ghz_point(16, std::nullopt, 1.0)(1, 1, 1), 0.831470, 1e-6);
  EXPECT_NEAR(ghz_point(16, std::nullopt, 0.5)(1, 1, 1), 0.5 * std::cos(3 * std::numbers::pi / 16), 1e-15);
}

TEST(Bell2Exact, Examples) {
  EXPECT_DOUBLE_EQ(bell2_exact_oracle(chsh()).value, 2.0);
  EXPECT_DOUBLE_EQ(bell2_exact_oracle(Eigen::MatrixXd::Identity(3, 3)).value, 3.0);
  EXPECT_DOUBLE_EQ(bell2_exact_oracle(Eigen::MatrixXd::Zero(4, 4)).value, 0.0);
  try {
    bell2_exact_oracle(Eigen::MatrixXd::Zero(31, 31));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::budget_exceeded);
  }
}

TEST(Bell2Exact, TieBreakIsLowestIndex) {
  // all b give the same value, so b must be all +1
  const auto r = bell2_exact_oracle(Eigen::MatrixXd::Zero(5, 5));
  for (int s : r.strategy.b) EXPECT_EQ(s, 1);
}

TEST(Bell2Exact, IndependentOfThreadCount) {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd w = testutil::random_matrix(rng, 18, 18);
  set_thread_limit(1);
  const auto a = bell2_exact_oracle(w);
  set_thread_limit(4);
  const auto b = bell2_exact_oracle(w);
  set_thread_limit(0);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.strategy.b, b.strategy.b);
}

TEST(Bell2Heuristic, Examples) {
  EXPECT_DOUBLE_EQ(bell2_heuristic_oracle(chsh(), 16, 0).value, 2.0);
  EXPECT_DOUBLE_EQ(bell2_heuristic_oracle(Eigen::MatrixXd::Zero(3, 3), 4, 0).value, 0.0);
  EXPECT_THROW(bell2_heuristic_oracle(chsh(), 0, 0), error);
}

TEST(Bell2Heuristic, AgreesWithExactOnRandom8x8) {
  std::mt19937_64 rng(8);
  int agree = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::MatrixXd w = testutil::random_matrix(rng, 8, 8);
    const double exact = bell2_exact_oracle(w).value;
    const double heur = bell2_heuristic_oracle(w, 64, static_cast<std::uint64_t>(t) * 1000).value;
    EXPECT_LE(heur, exact + 1e-12);
    if (heur >= exact - 1e-9) ++agree;
  }
  EXPECT_GE(agree, 95);
}

TEST(Bell3Exact, MerminFunctional) {
  Tensor3 w = Tensor3::zero(2);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) w(x, y, z) = std::cos((x + y + z) * std::numbers::pi / 2);
  const auto r = bell3_exact_oracle(w);
  EXPECT_NEAR(r.value, 2.0, 1e-12);
  const Tensor3 q1 = ghz_point(2, std::nullopt, 1.0);
  EXPECT_NEAR(q1.data.dot(w.data), 4.0, 1e-12);
  EXPECT_NEAR(visibility_bound(w, r.value, q1), 0.5, 1e-12);
}

TEST(Bell3Exact, ZeroAndCap) {
  EXPECT_EQ(bell3_exact_oracle(Tensor3::zero(3)).value, 0.0);
  EXPECT_THROW(bell3_exact_oracle(Tensor3::zero(13)), error);
}

TEST(Bell3Heuristic, AgreesWithExactOnRandom4x4x4) {
  std::mt19937_64 rng(9);
  int agree = 0;
  for (int t = 0; t < 100; ++t) {
    const Tensor3 w = random_tensor(rng, 4);
    const double exact = bell3_exact_oracle(w).value;
    const double heur = bell3_heuristic_oracle(w, 64, static_cast<std::uint64_t>(t) * 1000).value;
    EXPECT_LE(heur, exact + 1e-12);
    if (heur >= exact - 1e-9) ++agree;
  }
  EXPECT_GE(agree, 90);
  EXPECT_EQ(bell3_heuristic_oracle(Tensor3::zero(3), 4, 1).value, 0.0);
}

TEST(VisibilityBound, Examples) {
  const Point w{{1.0}};
  EXPECT_NEAR(visibility_bound(w, 2.0, Point{{2.0 * std::sqrt(2.0)}}), kH, 1e-15);
  EXPECT_NEAR(visibility_bound(w, 2.0, Point{{4.0}}), 0.5, 1e-15);
  try {
    visibility_bound(w, 2.0, Point{{2.0}});
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::no_separation);
  }
}

TEST(VisibilityBound, ChshFunctional) {
  // the singlet correlations are -a.b, so the CHSH functional enters with a minus sign
  const Eigen::MatrixXd w = -chsh();
  const double local = bell2_exact_oracle(w).value;
  EXPECT_NEAR(visibility_bound(w, local, werner_point(chsh_vectors(), 1.0)), kH, 1e-12);
}

TEST(QuantumSeesaw, Examples) {
  EXPECT_NEAR(quantum_seesaw_2party(chsh(), std::nullopt, 3).value, 2.0 * std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(quantum_seesaw_2party(Eigen::MatrixXd::Zero(2, 2), std::nullopt, 3).value, 0.0, 1e-15);
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  const auto r = quantum_seesaw_2party(one, std::nullopt, 5);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_NEAR(r.vectors.a[0].dot(r.vectors.b[0]), -1.0, 1e-12);
}

TEST(OptimizeMeasurements, SmallScenariosNeverBeatChsh) {
  for (int n : {3, 4}) {
    MeasurementConfig c;
    c.v_start = 0.75;
    c.engine_iterations = 2000;
    c.seed = static_cast<std::uint64_t>(n);
    const auto r = optimize_measurements(n, c);
    EXPECT_GE(r.bound, kH - 1e-3) << "n=" << n;
    EXPECT_TRUE(r.witness.local_bound_exact);
    EXPECT_NEAR(bell2_exact_oracle(r.witness.w).value, r.witness.local_bound, 1e-12);
  }
}

TEST(OptimizeMeasurements, StallsInsideThePolytope) {
  MeasurementConfig c;
  c.v_start = 0.5;
  c.v_floor = 0.45;
  c.engine_iterations = 500;
  c.stall_rounds = 2;
  try {
    optimize_measurements(2, c);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::stalled);
  }
}

// Properties

TEST(BellProperty, StrategiesReproduceValues) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + t % 7;
    const Eigen::MatrixXd w = testutil::random_matrix(rng, n, n);
    for (const auto& r : {bell2_exact_oracle(w), bell2_heuristic_oracle(w, 4, static_cast<std::uint64_t>(t))}) {
      EXPECT_NEAR(evaluate(w, r.strategy), r.value, 1e-12);
      EXPECT_NEAR(flatten(vertex(r.strategy)).dot(flatten(w)), r.value, 1e-12);
      for (int s : r.strategy.a) EXPECT_TRUE(s == 1 || s == -1);
    }
    if (n <= 5) {
      EXPECT_NEAR(bell2_exact_oracle(w).value, testutil::brute_bell2(w), 1e-12);
    }
  }
}

TEST(BellProperty, TripartiteExactMatchesBruteForce) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 200; ++t) {
    const Tensor3 w = random_tensor(rng, 2 + t % 3);
    const auto r = bell3_exact_oracle(w);
    EXPECT_NEAR(r.value, brute_bell3(w), 1e-12);
    EXPECT_NEAR(evaluate(w, r.strategy), r.value, 1e-12);
    EXPECT_NEAR(vertex3(r.strategy).data.dot(w.data), r.value, 1e-12);
  }
}

TEST(BellProperty, WernerRotationInvariance) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 1000; ++t) {
    const auto m = random_bloch_vectors(4, static_cast<std::uint64_t>(t));
    const Eigen::Matrix3d rot =
        Eigen::Quaterniond(Eigen::Vector4d(testutil::random_point(rng, 4).normalized())).toRotationMatrix();
    BlochVectors rotated;
    for (const auto& a : m.a) rotated.a.push_back((rot * a).normalized());
    for (const auto& b : m.b) rotated.b.push_back((rot * b).normalized());
    EXPECT_LE((werner_point(m, 0.8) - werner_point(rotated, 0.8)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(BellProperty, VisibilityBoundRescalingInvariant) {
  std::mt19937_64 rng(44);
  const Eigen::MatrixXd q = werner_point(chsh_vectors(), 1.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::MatrixXd w = -chsh() + 0.05 * testutil::random_matrix(rng, 2, 2);
    const double local = bell2_exact_oracle(w).value;
    const double quantum = flatten(q).dot(flatten(w));
    if (!(quantum > local)) continue;
    const double s = scale(rng);
    EXPECT_NEAR(visibility_bound(w, local, q), visibility_bound(Eigen::MatrixXd(s * w), s * local, q), 1e-12);
  }
}

TEST(BellProperty, SeesawMonotone) {
  std::mt19937_64 rng(45);
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + t % 5;
    const auto r = quantum_seesaw_2party(testutil::random_matrix(rng, n, n), std::nullopt, static_cast<std::uint64_t>(t));
    for (std::size_t i = 1; i < r.trace.size(); ++i) ASSERT_GE(r.trace[i], r.trace[i - 1] - 1e-12);
  }
}

TEST(BellProperty, HeuristicNeverExceedsExact) {
  std::mt19937_64 rng(46);
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + t % 9;
    const Eigen::MatrixXd w = testutil::random_matrix(rng, n, n);
    EXPECT_LE(bell2_heuristic_oracle(w, 3, static_cast<std::uint64_t>(t)).value, bell2_exact_oracle(w).value + 1e-12);
  }
}
