#include "vmsfem/ns_solver.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>

using namespace vmsfem;

namespace {

NsProblem make_problem(const GridMesh& mesh, double rho, double mu, double dt, bool bubble = false) {
  NsProblem pb;
  pb.mesh = &mesh;
  PhaseProperties props;
  props.rho = rho;
  props.mu = mu;
  pb.properties = uniform_properties(props);
  pb.dt = dt;
  pb.bubble = bubble;
  return pb;
}

FieldState random_state(const GridMesh& mesh, std::mt19937& rng, double scale, bool bubble = false) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  FieldState s = FieldState::zeros(mesh, bubble);
  for (int i = 0; i < s.u.size(); ++i) s.u[i] = scale * d(rng);
  for (int i = 0; i < s.p.size(); ++i) s.p[i] = 100.0 * scale * d(rng);
  return s;
}

// 5-point Laplacian energy of interior nodal pressures relative to their norm.
double pressure_roughness(const GridMesh& m, const Eigen::VectorXd& p) {
  double lap = 0.0;
  double norm = 0.0;
  for (int j = 1; j < m.ny(); ++j) {
    for (int i = 1; i < m.nx(); ++i) {
      const double c = p[m.node_id(i, j)];
      const double l = p[m.node_id(i - 1, j)] + p[m.node_id(i + 1, j)] + p[m.node_id(i, j - 1)] +
                       p[m.node_id(i, j + 1)] - 4.0 * c;
      lap += l * l;
      norm += c * c;
    }
  }
  return std::sqrt(lap / std::max(norm, 1e-300));
}

}  // namespace

TEST(ComputeTau, ClosedForms) {
  PhaseProperties still{1000.0, 0.0, Vec2::Zero(), false};
  EXPECT_DOUBLE_EQ(compute_tau(still, 0.0, 0.1, 1e-3).tau_M, 1e-3 / 1000.0);
  const double inf = std::numeric_limits<double>::infinity();
  PhaseProperties visc{1.0, 1.0, Vec2::Zero(), false};
  EXPECT_DOUBLE_EQ(compute_tau(visc, 0.0, 1.0, inf).tau_M, 0.25);
  PhaseProperties adv{1.0, 0.0, Vec2::Zero(), false};
  EXPECT_NEAR(compute_tau(adv, 1.0, 0.1, inf).tau_M, 0.05, 1e-15);
  const StabParams s = compute_tau(visc, 0.0, 1.0, inf);
  EXPECT_DOUBLE_EQ(s.tau_m, 1.0 / (4.0 * s.tau_M));
}

TEST(ComputeTau, DegenerateInputs) {
  PhaseProperties zero{0.0, 0.0, Vec2::Zero(), false};
  const StabParams s = compute_tau(zero, 0.0, 0.1, std::numeric_limits<double>::infinity());
  EXPECT_EQ(s.tau_M, 0.0);
  EXPECT_EQ(s.tau_m, 0.0);
  PhaseProperties p{1.0, 1.0, Vec2::Zero(), false};
  EXPECT_THROW(compute_tau(p, 0.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(compute_tau(p, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST(Residual, ZeroStateGivesZero) {
  GridMesh m(4, 4, Rect{0, 0, 1, 1});
  for (bool bubble : {false, true}) {
    NsProblem pb = make_problem(m, 1000.0, 1.0, 1e-3, bubble);
    const FieldState s = FieldState::zeros(m, bubble);
    EXPECT_EQ(assemble_residual(pb, s, s).lpNorm<Eigen::Infinity>(), 0.0);
  }
}

TEST(Residual, UniformFlowInteriorVanishes) {
  GridMesh m(8, 8, Rect{0, 0, 2, 2});
  NsProblem pb = make_problem(m, 1000.0, 2.0, 1e-3);
  FieldState s = FieldState::zeros(m, false);
  for (int n = 0; n < m.node_count(); ++n) {
    s.u[2 * n] = 1.0;
    s.p[n] = 37.0;
  }
  const Eigen::VectorXd r = assemble_residual(pb, s, s);
  const DofLayout layout{m.node_count()};
  for (int n = 0; n < m.node_count(); ++n) {
    if (m.is_boundary_node(n)) continue;
    EXPECT_NEAR(r[layout.velocity(n, 0)], 0.0, 1e-10);
    EXPECT_NEAR(r[layout.velocity(n, 1)], 0.0, 1e-10);
    EXPECT_NEAR(r[layout.pressure(n)], 0.0, 1e-10);
  }
}

TEST(Tangent, MatchesFiniteDifferences) {
  GridMesh m(5, 4, Rect{0, 0, 1.0, 0.8});
  std::mt19937 rng(7);
  NsProblem pb = make_problem(m, 1200.0, 3.0, 2e-3);
  std::vector<SymTensor2> sigma(4 * m.element_count(), SymTensor2{120.0, -80.0, 45.0});
  pb.extra_stress = sigma;
  for (int trial = 0; trial < 3; ++trial) {
    const FieldState prev = random_state(m, rng, 0.5);
    const FieldState advect = random_state(m, rng, 0.5);
    const FieldState x = random_state(m, rng, 0.5);
    const NsAssembler as(m);
    const LinearSystem sys = as.system(pb, x, prev, advect);
    const Eigen::VectorXd r0 = as.residual(pb, x, prev, advect);
    EXPECT_LT((sys.rhs + r0).norm(), 1e-12 * (1.0 + r0.norm()));
    FieldState dir = random_state(m, rng, 1.0);
    Eigen::VectorXd dx(3 * m.node_count());
    dx << dir.u, dir.p;
    const double eps = 1e-6;
    FieldState xp = x;
    xp.u += eps * dir.u;
    xp.p += eps * dir.p;
    const Eigen::VectorXd fd = (as.residual(pb, xp, prev, advect) - r0) / eps;
    const Eigen::VectorXd jd = sys.matrix * dx;
    EXPECT_LT((fd - jd).norm(), 1e-5 * jd.norm());
  }
}

TEST(Tangent, MassDiagonalPositive) {
  GridMesh m(3, 3, Rect{0, 0, 1, 1});
  NsProblem pb = make_problem(m, 1000.0, 0.0, 1e-3);
  const FieldState s = FieldState::zeros(m, false);
  const LinearSystem sys = assemble_tangent(pb, s);
  for (int i = 0; i < sys.layout.velocity_count(); ++i) EXPECT_GT(sys.matrix.coeff(i, i), 0.0);
}

TEST(Dirichlet, FixedRowsAreIdentity) {
  GridMesh m(3, 3, Rect{0, 0, 1, 1});
  NsProblem pb = make_problem(m, 1.0, 1.0, 0.1);
  FieldState s = FieldState::zeros(m, false);
  s.u.setConstant(0.25);
  LinearSystem sys = assemble_tangent(pb, s);
  DirichletSet bc;
  bc.add(4, 1.0);
  apply_dirichlet(sys, bc, s);
  EXPECT_DOUBLE_EQ(sys.matrix.coeff(4, 4), 1.0);
  EXPECT_DOUBLE_EQ(sys.matrix.coeff(4, 5), 0.0);
  EXPECT_DOUBLE_EQ(sys.rhs[4], 0.75);
  DirichletSet bad;
  bad.add(10000, 0.0);
  EXPECT_THROW(apply_dirichlet(sys, bad, s), std::invalid_argument);
}

TEST(StepExplicit, ZeroResidualKeepsState) {
  GridMesh m(3, 3, Rect{0, 0, 1, 1});
  NsProblem pb = make_problem(m, 1000.0, 1.0, 1e-3);
  const FieldState s = FieldState::zeros(m, false);
  LinearSystem sys = assemble_tangent(pb, s);
  apply_dirichlet(sys, no_slip_box(m, false, 0), s);
  const FieldState next = step_explicit(s, sys, 1e-3);
  EXPECT_EQ(next.u.lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_EQ(next.p.lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_DOUBLE_EQ(next.t, 1e-3);
}

TEST(StepExplicit, BodyForceMatchesDenseSolve) {
  GridMesh m(3, 3, Rect{0, 0, 1, 1});
  for (bool bubble : {false, true}) {
    NsProblem pb = make_problem(m, 1000.0, 5.0, 1e-2, bubble);
    // rotational forcing: a uniform force would just be balanced by pressure
    pb.properties = [](int, const Vec2& x) {
      return PhaseProperties{1000.0, 5.0, Vec2(-(x.y() - 0.5), x.x() - 0.5) * 100.0, false};
    };
    const FieldState s = FieldState::zeros(m, bubble);
    LinearSystem sys = assemble_tangent(pb, s);
    apply_dirichlet(sys, no_slip_box(m, false, 0), s);
    const FieldState next = step_explicit(s, sys, pb.dt);
    const Eigen::MatrixXd dense(sys.matrix);
    const Eigen::VectorXd ref = dense.fullPivLu().solve(sys.rhs);
    const int nv = sys.layout.velocity_count();
    EXPECT_LT((next.u - ref.head(nv)).norm(), 1e-10 * (1.0 + ref.norm()));
    const int c = m.node_id(1, 1);
    EXPECT_GT(next.u[2 * c], 1e-6);
    EXPECT_LT(next.u[2 * c + 1], -1e-6);
    if (bubble) EXPECT_GT(next.bubble.lpNorm<Eigen::Infinity>(), 0.0);
  }
}

TEST(Stabilization, RemovingItProducesCheckerboard) {
  GridMesh m(16, 16, Rect{0, 0, 1, 1});
  auto lid_solve = [&](bool stabilized) {
    NsProblem pb = make_problem(m, 1.0, 0.01, 0.05);
    pb.stabilized = stabilized;
    FieldState s = FieldState::zeros(m, false);
    DirichletSet bc = no_slip_box(m, false, 0);
    for (int i = 1; i < m.nx(); ++i) bc.add(2 * m.node_id(i, m.ny()), 1.0);
    for (int step = 0; step < 5; ++step) {
      LinearSystem sys = assemble_tangent(pb, s);
      apply_dirichlet(sys, bc, s);
      if (!stabilized) {
        // Equal-order pairs without stabilization leave a spurious pressure
        // mode; a vanishing pressure mass keeps the factorization defined.
        for (int n = 1; n < m.node_count(); ++n) {
          const int d = sys.layout.pressure(n);
          sys.matrix.coeffRef(d, d) -= 1e-10;
        }
      }
      s = step_explicit(s, sys, pb.dt);
    }
    return pressure_roughness(m, s.p);
  };
  const double smooth = lid_solve(true);
  const double rough = lid_solve(false);
  EXPECT_GT(rough, 10.0 * smooth);
}

TEST(Continuity, ResidualDoesNotGrow) {
  GridMesh m(8, 8, Rect{0, 0, 1, 1});
  NsProblem pb = make_problem(m, 1000.0, 10.0, 1e-2);
  PhaseProperties props{1000.0, 10.0, Vec2(0.0, -50.0), false};
  pb.properties = uniform_properties(props);
  FieldState s = FieldState::zeros(m, false);
  DirichletSet bc = no_slip_box(m, false, 0);
  for (int i = 1; i < m.nx(); ++i) bc.add(2 * m.node_id(i, m.ny()), 0.1);
  FieldState prev = s;
  for (int step = 0; step < 5; ++step) {
    LinearSystem sys = assemble_tangent(pb, s);
    apply_dirichlet(sys, bc, s);
    const FieldState next = step_explicit(s, sys, pb.dt);
    if (step > 0) {
      EXPECT_LE(continuity_residual_norm(pb, next, s), 1.5 * continuity_residual_norm(pb, s, prev) + 1e-12);
    }
    prev = s;
    s = next;
  }
}
