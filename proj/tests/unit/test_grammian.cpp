#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dualmpc/errors.hpp"
#include "dualmpc/grammian.hpp"
#include "support.hpp"

using namespace dualmpc;
using testsupport::make_window;
using testsupport::v2;

TEST(Grammian, SymmetricPairIsIdentity) {
  BearingModel model({});
  std::vector<Vector> xs{v2(1, 0), v2(0, 1)};
  Matrix g = grammian_full(v2(0, 0), xs, model);
  EXPECT_EQ(g, Matrix::Identity(2, 2));
  EXPECT_EQ(min_eigenvalue(g), 1.0);
}

TEST(Grammian, RadialPairIsRankOne) {
  BearingModel model({});
  std::vector<Vector> xs{v2(1, 0), v2(2, 0)};
  Matrix g = grammian_full(v2(0, 0), xs, model);
  Matrix expected(2, 2);
  expected << 0, 0, 0, 1.25;
  EXPECT_LT((g - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(min_eigenvalue(g), 0.0);
}

TEST(Grammian, SingleStateIsRankDeficient) {
  BearingModel model({});
  std::vector<Vector> xs{v2(3, -1)};
  EXPECT_NEAR(min_eigenvalue(grammian_full(v2(0, 0), xs, model)), 0.0, 1e-15);
}

TEST(Grammian, MatchesHandWrittenSum) {
  BearingModel model({});
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector p = v2(trial % 7, -trial % 5);
    auto xs = testsupport::random_states(rng, p, 10);
    Matrix g = grammian_full(p, xs, model);
    auto o = testsupport::oracle::grammian(p, xs);
    EXPECT_NEAR(g(0, 0), o[0], 1e-12);
    EXPECT_NEAR(g(0, 1), o[1], 1e-12);
    EXPECT_NEAR(g(1, 0), o[2], 1e-12);
    EXPECT_NEAR(g(1, 1), o[3], 1e-12);
  }
}

TEST(Grammian, RotationInvariantSpectrum) {
  BearingModel model({});
  std::mt19937_64 rng(22);
  auto xs = testsupport::random_states(rng, v2(0, 0), 10);
  const double a = 0.7;
  Matrix rot(2, 2);
  rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  std::vector<Vector> turned;
  for (const auto& x : xs) turned.push_back(rot * x);
  EXPECT_NEAR(min_eigenvalue(grammian_full(v2(0, 0), xs, model)),
              min_eigenvalue(grammian_full(v2(0, 0), turned, model)), 1e-12);
  EXPECT_NEAR(grammian_full(v2(0, 0), xs, model).trace(), grammian_full(v2(0, 0), turned, model).trace(), 1e-12);
}

TEST(Grammian, AddingStatesNeverLowersMinEigenvalue) {
  BearingModel model({});
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    auto xs = testsupport::random_states(rng, v2(5, 8), 12);
    double prev = 0.0;
    std::vector<Vector> grown;
    for (const auto& x : xs) {
      grown.push_back(x);
      const double now = min_eigenvalue(grammian_full(v2(5, 8), grown, model));
      EXPECT_GE(now, prev - 1e-12);
      prev = now;
    }
  }
}

TEST(GrammianSplit, RealizedPlusPredictedEqualsShiftedWindow) {
  BearingModel model({});
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    auto xs = testsupport::random_states(rng, v2(5, 8), 10);
    auto w = make_window(xs, v2(5, 8));
    const Vector u = v2(std::cos(trial), std::sin(trial));
    const Vector p = v2(4.8, 8.2);
    auto s = split(p, w, model);
    std::vector<Vector> shifted(xs.begin() + 1, xs.end());
    shifted.push_back(model.dynamics(xs.back(), u, p));
    Matrix full = grammian_full(p, shifted, model);
    EXPECT_LT((s.gamma + s.predicted(p, xs.back(), u) - full).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GrammianSplit, PredictedTermFormula) {
  // From (0,0) with u=(0,0) the next state stays at the origin; p=(1,1) gives
  // H = (-1, 1)/2, so S_f = [[1,-1],[-1,1]]/4.
  BearingModel model({});
  Matrix s = predicted_term(v2(1, 1), v2(0, 0), v2(0, 0), model);
  Matrix expected(2, 2);
  expected << 0.25, -0.25, -0.25, 0.25;
  EXPECT_LT((s - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MinEigenvalue, KnownMatrices) {
  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  EXPECT_NEAR(min_eigenvalue(a), 1.0, 1e-15);
  Matrix d(2, 2);
  d << 0, 0, 0, 1.25;
  EXPECT_EQ(min_eigenvalue(d), 0.0);
  EXPECT_EQ(min_eigenvalue(Matrix::Identity(2, 2)), 1.0);
  Matrix big = Matrix::Identity(3, 3) * 2.0;
  big(0, 2) = big(2, 0) = 1.0;
  EXPECT_NEAR(min_eigenvalue(big), 1.0, 1e-14);
}

TEST(MinEigenvalue, AgreesWithGeneralSolver) {
  std::mt19937_64 rng(25);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 200; ++trial) {
    Matrix m(2, 2);
    m << n(rng), n(rng), 0, n(rng);
    m(1, 0) = m(0, 1);
    EXPECT_NEAR(min_eigenvalue(m), testsupport::oracle::min_eigenvalue(m), 1e-12);
  }
}

TEST(MinEigenvalue, RejectsAsymmetricInput) {
  Matrix m(2, 2);
  m << 1, 0.1, 0, 1;
  EXPECT_THROW(min_eigenvalue(m), NotSymmetric);
}

TEST(ObservabilityReport, LevelFlag) {
  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  EXPECT_TRUE(observability_report(a, 1.0).level_ok);
  EXPECT_FALSE(observability_report(a, 1.5).level_ok);
}
