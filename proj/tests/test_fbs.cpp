#include "qenv/fbs.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qenv;

namespace {

bool non_increasing(const std::vector<double>& tr, double slack = 1e-9) {
  for (std::size_t i = 1; i < tr.size(); ++i)
    if (tr[i] > tr[i - 1] + slack) return false;
  return true;
}

std::vector<PenaltyKind> all_kinds(double eps_norm = 1.0) {
  return {L1{eps_norm}, Card{1.0}, IndicatorPK{10}, QuadEnvCard{1.0}, QuadEnvPK{10}};
}

}  // namespace

TEST(StepSize, Examples) {
  EXPECT_DOUBLE_EQ(default_step_size(SensingMatrix(Matrix::Identity(3, 3))), 0.45);
  EXPECT_DOUBLE_EQ(default_step_size(SensingMatrix(2.0 * Matrix::Identity(3, 3))), 0.1125);
  const SensingMatrix a = generate_sensing_matrix(100, 200, 1);
  const double t = default_step_size(a);
  EXPECT_GT(t, 0.0);
  EXPECT_LE(t, 0.45);
  EXPECT_LE(2.0 * t * a.op_norm() * a.op_norm(), 0.9 + 1e-12);
}

TEST(Objective, Examples) {
  const SensingMatrix a(Matrix::Identity(1, 1));
  const Vector b = Vector::Constant(1, 2.0);
  EXPECT_DOUBLE_EQ(objective_value(a, b, QuadEnvCard{1.0}, b), 1.0);
  for (const auto& k : std::vector<PenaltyKind>{L1{1.0}, Card{1.0}, IndicatorPK{0}, QuadEnvCard{1.0}, QuadEnvPK{1}})
    EXPECT_DOUBLE_EQ(objective_value(a, b, k, Vector::Zero(1)), 4.0);
  const SensingMatrix a2(Matrix::Identity(2, 2));
  EXPECT_TRUE(std::isinf(objective_value(a2, Vector::Zero(2), IndicatorPK{1}, Vector::Ones(2))));
}

TEST(ShadowPoint, Identities) {
  const SensingMatrix a = generate_sensing_matrix(8, 12, 2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Vector b(8), x(12);
  for (auto& v : b) v = g(rng);
  for (auto& v : x) v = g(rng);
  EXPECT_LE((shadow_point(a, b, Vector::Zero(12)) - a.entries().transpose() * b).norm(), 1e-14);
  const Vector z = shadow_point(a, b, x);
  EXPECT_LE((z - x - a.entries().transpose() * (b - a.entries() * x)).norm(), 1e-12);
  const SensingMatrix id(Matrix::Identity(4, 4));
  const Vector b4 = (Vector(4) << 1, 2, 3, 4).finished();
  EXPECT_LE((shadow_point(id, b4, Vector::Constant(4, 7.0)) - b4).norm(), 1e-14);
}

TEST(ShadowPoint, OracleSolutionMatchesOnSupport) {
  const SensingMatrix a = generate_sensing_matrix(20, 40, 5);
  const GroundTruth gt = generate_ground_truth(40, 4, 2.0, 4.0, 0.0, 6);
  const ProblemInstance p = synthesize_measurements(a, gt.x0, 0.3, 7);
  const Vector xs = oracle_solution(a, p.b, gt.support);
  const Vector z = shadow_point(a, p.b, xs);
  for (auto j : gt.support) EXPECT_NEAR(z(j), xs(j), 1e-10);
}

TEST(FbsSolve, IdentityExample) {
  const SensingMatrix a(Matrix::Identity(2, 2));
  const Vector b = (Vector(2) << 2.0, 0.3).finished();
  const SolveResult r = fbs_solve(a, b, QuadEnvCard{1.0});
  EXPECT_NEAR(r.x_final(0), 2.0, 1e-9);
  EXPECT_EQ(r.x_final(1), 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.support, SupportSet({0}));
}

TEST(FbsSolve, ZeroDataStopsImmediately) {
  const SensingMatrix a = generate_sensing_matrix(5, 9, 1);
  for (const auto& k : all_kinds()) {
    const SolveResult r = fbs_solve(a, Vector::Zero(5), std::visit([](auto p) -> PenaltyKind {
      if constexpr (requires { p.k; }) p.k = std::min<Eigen::Index>(p.k, 3);
      return p;
    }, k));
    EXPECT_EQ(r.x_final.norm(), 0.0);
    EXPECT_EQ(r.iterations_used, 1);
    EXPECT_TRUE(r.converged);
  }
}

TEST(FbsSolve, RejectsBadConfig) {
  const SensingMatrix a = generate_sensing_matrix(5, 9, 1);
  SolverConfig c;
  c.step = 0.5;
  EXPECT_THROW(fbs_solve(a, Vector::Zero(5), QuadEnvCard{1.0}, c), std::invalid_argument);
  c.step = -1.0;
  EXPECT_THROW(fbs_solve(a, Vector::Zero(5), L1{1.0}, c), std::invalid_argument);
  EXPECT_THROW(fbs_solve(a, Vector::Zero(4), L1{1.0}), std::invalid_argument);
  EXPECT_THROW(fbs_solve(a, Vector::Zero(5), QuadEnvPK{10}), std::invalid_argument);
  SolverConfig d;
  d.max_iter = 0;
  EXPECT_THROW(fbs_solve(a, Vector::Zero(5), L1{1.0}, d), std::invalid_argument);
}

TEST(FbsSolve, DivergenceCarriesTrace) {
  const SensingMatrix a = generate_sensing_matrix(20, 30, 1);
  const Vector b = Vector::Constant(20, 1.0);
  SolverConfig c;
  c.step = 50.0;
  try {
    fbs_solve(a, b, L1{0.0}, c);
    FAIL() << "expected divergence";
  } catch (const SolverDiverged& e) {
    EXPECT_GE(e.trace().size(), 2u);
  }
}

TEST(FbsSolve, DescentAndStationarityOnRandomInstances) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const SensingMatrix a = generate_sensing_matrix(60, 120, s);
    const GroundTruth gt = generate_ground_truth(120, 6, 2.0, 4.0, 0.0, s + 10);
    const ProblemInstance p = synthesize_measurements(a, gt.x0, 0.5, s + 20);
    for (const auto& k : {PenaltyKind{L1{0.2}}, PenaltyKind{Card{1.0}}, PenaltyKind{IndicatorPK{6}},
                          PenaltyKind{QuadEnvCard{1.0}}, PenaltyKind{QuadEnvPK{6}}}) {
      for (auto start : {StartPoint{StartZero{}}, StartPoint{StartLeastSquares{}}}) {
        SolverConfig c;
        c.start = start;
        const SolveResult r = fbs_solve(a, p.b, k, c);
        EXPECT_TRUE(non_increasing(r.objective_trace)) << penalty_name(k);
        if (is_quad_env(k) && r.converged && r.stationarity_exact)
          EXPECT_LE(r.stationarity_residual, 1e-6 * (1.0 + r.shadow_norm)) << penalty_name(k);
      }
    }
  }
}

TEST(FbsSolve, EnvelopeRecoversSupportAtModerateNoise) {
  int ok_card = 0, ok_pk = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const SensingMatrix a = generate_sensing_matrix(100, 200, s);
    const GroundTruth gt = generate_ground_truth(200, 10, 2.0, 4.0, 11.0, s + 100);
    const ProblemInstance p = synthesize_measurements(a, gt.x0, 1.0, s + 200);
    ok_card += fbs_solve(a, p.b, QuadEnvCard{1.0}).support == gt.support;
    ok_pk += fbs_solve(a, p.b, QuadEnvPK{10}).support == gt.support;
  }
  EXPECT_GE(ok_card, 9);
  EXPECT_GE(ok_pk, 9);
}

TEST(FbsSolve, PermutationEquivariance) {
  const SensingMatrix a = generate_sensing_matrix(30, 50, 4);
  const GroundTruth gt = generate_ground_truth(50, 4, 2.0, 4.0, 0.0, 5);
  const ProblemInstance p = synthesize_measurements(a, gt.x0, 0.4, 6);
  std::vector<int> perm(50);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(7);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix ap(30, 50);
  for (int j = 0; j < 50; ++j) ap.col(j) = a.col(perm[static_cast<std::size_t>(j)]);
  const SensingMatrix pa(ap);
  for (const auto& k : {PenaltyKind{QuadEnvCard{1.0}}, PenaltyKind{QuadEnvPK{4}}}) {
    const Vector x = fbs_solve(a, p.b, k).x_final;
    const Vector y = fbs_solve(pa, p.b, k).x_final;
    for (int j = 0; j < 50; ++j) EXPECT_NEAR(y(j), x(perm[static_cast<std::size_t>(j)]), 1e-8);
  }
}

TEST(FbsSolve, EnvelopeMinimumMatchesCardGrid) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    Matrix m(2, 2);
    for (Eigen::Index i = 0; i < 4; ++i) m.data()[i] = g(rng);
    m.col(0) *= 0.9 / m.col(0).norm();
    m.col(1) *= 0.9 / m.col(1).norm();
    const SensingMatrix a(m);
    const Vector b = (Vector(2) << g(rng) * 2, g(rng) * 2).finished();
    double grid_min = kInfinity;
    for (double x0 = -6; x0 <= 6; x0 += 0.005)
      for (double x1 = -6; x1 <= 6; x1 += 0.005) {
        const Vector x = (Vector(2) << x0, x1).finished();
        grid_min = std::min(grid_min, objective_value(a, b, QuadEnvCard{0.5}, x));
      }
    double card_min = kInfinity;
    for (int mask = 0; mask < 4; ++mask) {
      std::vector<Eigen::Index> s;
      for (int j = 0; j < 2; ++j)
        if (mask >> j & 1) s.push_back(j);
      const Vector x = oracle_solution(a, b, SupportSet(s));
      card_min = std::min(card_min, objective_value(a, b, Card{0.5}, x));
    }
    EXPECT_LE(card_min, grid_min + 1e-9);
    EXPECT_GE(card_min, grid_min - 1e-3);
  }
}
