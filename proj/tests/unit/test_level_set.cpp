#include "vmsfem/level_set.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace vmsfem;

namespace {

Eigen::VectorXd nodal(const GridMesh& m, const std::function<double(const Vec2&)>& f) {
  Eigen::VectorXd v(m.node_count());
  for (int n = 0; n < m.node_count(); ++n) v[n] = f(m.node(n));
  return v;
}

}  // namespace

TEST(Penalty, Examples) {
  EXPECT_DOUBLE_EQ(compute_penalty_terms(Vec2(0.6, 0.8), 1.0, 0.1, 0.5).k1, 0.0);
  EXPECT_DOUBLE_EQ(compute_penalty_terms(Vec2(2.0, 0.0), 0.0, 0.1, 0.5).lambda1, 0.0);
  const PenaltyTerms t = compute_penalty_terms(Vec2(0.0, 2.0), 1.0, 0.1, 0.5);
  EXPECT_NEAR(t.k1, 0.5, 1e-15);
  EXPECT_NEAR(t.lambda1, 0.0025, 1e-15);
  EXPECT_DOUBLE_EQ(compute_penalty_terms(Vec2(0.05, 0.0), 1.0, 0.1, 0.5).k1, 0.0);
  EXPECT_LT(compute_penalty_terms(Vec2(0.5, 0.0), 1.0, 0.1, 0.5).k1, 0.0);
}

TEST(LevelSetTau, ClosedForm) {
  EXPECT_DOUBLE_EQ(levelset_tau(0.0, 0.1, 1e-3), 1e-3);
  EXPECT_DOUBLE_EQ(levelset_tau(2.0, 0.1, std::numeric_limits<double>::infinity()), 0.1 / 4.0);
}

TEST(SmoothedHeaviside, Limits) {
  const double eps = 0.15;
  EXPECT_DOUBLE_EQ(smoothed_heaviside(10 * eps, eps), 1.0);
  EXPECT_DOUBLE_EQ(smoothed_heaviside(0.0, eps), 0.5);
  EXPECT_DOUBLE_EQ(smoothed_heaviside(-10 * eps, eps), 0.0);
  double last = 0.0;
  for (double p = -eps; p <= eps; p += eps / 20) {
    const double h = smoothed_heaviside(p, eps);
    EXPECT_GE(h, last - 1e-15);
    last = h;
  }
}

TEST(PhaseAt, Examples) {
  GridMesh m(10, 10, Rect{0, 0, 1, 1});
  const double eps = 1.5 * m.h_ele();
  const Eigen::VectorXd phi = nodal(m, [](const Vec2& x) { return x.y() - 0.5; });
  const PhaseSample above = phase_at(m, phi, Vec2(0.3, 0.5 + 0.4), 0.03);
  EXPECT_EQ(above.phase, 1);
  EXPECT_DOUBLE_EQ(above.indicator, 1.0);
  EXPECT_NEAR(phase_at(m, phi, Vec2(0.3, 0.5), eps).indicator, 0.5, 1e-12);
  const PhaseSample below = phase_at(m, phi, Vec2(0.3, 0.1), 0.03);
  EXPECT_EQ(below.phase, 2);
  EXPECT_DOUBLE_EQ(below.indicator, 0.0);
  EXPECT_THROW(phase_at(m, phi, Vec2(2.0, 0.5), eps), std::invalid_argument);
}

TEST(StepLevelSet, ExactDistanceAtRestIsFixed) {
  GridMesh m(12, 12, Rect{0, 0, 1, 1});
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * m.node_count());
  const VelocityView view(m, u);
  const Eigen::VectorXd phi = nodal(m, [](const Vec2& x) { return 0.6 * x.x() + 0.8 * x.y() - 0.7; });
  const LevelSetSystem sys = assemble_levelset(m, phi, view, 1e-2, 0.5);
  const Eigen::VectorXd next = step_levelset(phi, sys, 1e-2);
  EXPECT_LT((next - phi).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(StepLevelSet, UniformTranslationMovesInterface) {
  GridMesh m(40, 10, Rect{0, 0, 4, 1});
  Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * m.node_count());
  for (int n = 0; n < m.node_count(); ++n) u[2 * n] = 0.5;
  const VelocityView view(m, u);
  Eigen::VectorXd phi = nodal(m, [](const Vec2& x) { return 1.0 - x.x(); });
  const double dt = 0.02;
  for (int s = 0; s < 50; ++s) phi = step_levelset(phi, assemble_levelset(m, phi, view, dt, 0.5), dt);
  // After t = 1 the zero contour sits near x = 1.5 in the interior.
  const int n = m.node_id(15, 5);
  EXPECT_NEAR(phi[n], 0.0, 0.02);
  EXPECT_TRUE(std::isfinite(phi.norm()));
}

TEST(StepLevelSet, PenaltyPullsSteepGradientTowardUnity) {
  GridMesh m(32, 32, Rect{0, 0, 1, 1});
  Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * m.node_count());
  for (int n = 0; n < m.node_count(); ++n) u[2 * n] = 1.0;
  const VelocityView view(m, u);
  Eigen::VectorXd phi = nodal(m, [](const Vec2& x) { return 2.0 * (x.y() - 0.5); });
  const double before = recovered_gradient_norm(m, phi).mean();
  for (int s = 0; s < 20; ++s) phi = step_levelset(phi, assemble_levelset(m, phi, view, 0.01, 0.5), 0.01);
  const double after = recovered_gradient_norm(m, phi).mean();
  EXPECT_NEAR(before, 2.0, 1e-12);
  EXPECT_LT(after, before);
}

TEST(PhaseField, AdvanceKeepsFinite) {
  GridMesh m(8, 8, Rect{0, 0, 1, 1});
  PhaseField f;
  f.phi.push_back(nodal(m, [](const Vec2& x) { return x.y() - 0.4; }));
  Eigen::VectorXd u = Eigen::VectorXd::Constant(2 * m.node_count(), 0.1);
  advance_phase_field(f, m, VelocityView(m, u), 0.01);
  EXPECT_TRUE(f.finite());
}

TEST(ClassifyPhase, TwoAndThreeMaterials) {
  const std::vector<double> two_pos{0.3};
  const std::vector<double> two_neg{-0.3};
  EXPECT_EQ(classify_phase(two_pos, 2), 0);
  EXPECT_EQ(classify_phase(two_neg, 2), 1);
  // pairs (0,1), (0,2), (1,2)
  const std::vector<double> p1{-0.2, 0.1, 0.4};
  EXPECT_EQ(classify_phase(p1, 3), 1);
  // Cycle 0>1, 1>2, 2>0: the weakest decision (|0.05|) is flipped.
  const std::vector<double> cyc{0.5, -0.05, 0.3};
  EXPECT_EQ(classify_phase(cyc, 3), 0);
  EXPECT_THROW(classify_phase(p1, 4), std::invalid_argument);
}

TEST(ClassifyPhase, ExactlyOnePhaseEverywhere) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const std::vector<double> p{d(rng), d(rng), d(rng)};
    const int id = classify_phase(p, 3);
    EXPECT_GE(id, 0);
    EXPECT_LT(id, 3);
  }
}

TEST(NegativeArea, Disc) {
  GridMesh m(64, 64, Rect{0, 0, 1, 1});
  const Eigen::VectorXd phi = nodal(m, [](const Vec2& x) { return (x - Vec2(0.5, 0.5)).norm() - 0.25; });
  EXPECT_NEAR(negative_area(m, phi, 8), M_PI * 0.0625, 2e-3);
}
