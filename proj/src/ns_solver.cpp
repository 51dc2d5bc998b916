#include "vmsfem/ns_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vmsfem {

StabParams compute_tau(const PhaseProperties& props, double speed, double h, double dt) {
  if (!(h > 0.0)) throw std::invalid_argument("compute_tau: h must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("compute_tau: dt must be positive");
  const double inv = props.rho / dt + 2.0 * props.rho * std::abs(speed) / h + 4.0 * props.mu / (h * h);
  StabParams s;
  if (inv > 0.0 && std::isfinite(inv)) {
    s.tau_M = 1.0 / inv;
    s.tau_m = h * h / (4.0 * s.tau_M);
  }
  return s;
}

PropertyFn uniform_properties(const PhaseProperties& props) {
  return [props](int, const Vec2&) { return props; };
}

DirichletSet no_slip_box(const GridMesh& mesh, bool symmetry_top, int pressure_pin_node) {
  const DofLayout layout{mesh.node_count()};
  DirichletSet bc;
  for (int j = 0; j <= mesh.ny(); ++j) {
    for (int i = 0; i <= mesh.nx(); ++i) {
      const bool side = i == 0 || i == mesh.nx() || j == 0;
      const bool top = j == mesh.ny();
      if (!side && !top) continue;
      const int n = mesh.node_id(i, j);
      if (side || !symmetry_top) bc.add(layout.velocity(n, 0), 0.0);
      bc.add(layout.velocity(n, 1), 0.0);
    }
  }
  if (pressure_pin_node >= 0) {
    if (pressure_pin_node >= mesh.node_count()) {
      throw std::invalid_argument("no_slip_box: pressure pin node out of range");
    }
    bc.add(layout.pressure(pressure_pin_node), 0.0);
  }
  return bc;
}

namespace {

// Local element unknowns: 8 nodal velocities, 4 pressures, then 2 bubble velocities.
constexpr int kNodal = 12;
constexpr int kMax = 14;

int vel_index(int a, int c) { return a < 4 ? 2 * a + c : kNodal + c; }
int pres_index(int a) { return 8 + a; }

struct ElementData {
  std::array<Vec2, 5> u{};
  std::array<Vec2, 5> uprev{};
  std::array<Vec2, 5> adv{};
  std::array<double, 4> p{};
  int nb = 4;
};

ElementData gather(const GridMesh& mesh, int e, const FieldState& state, const FieldState& prev,
                   const FieldState& advect, bool bubble) {
  ElementData d;
  const auto nodes = mesh.element_nodes(e);
  for (int a = 0; a < 4; ++a) {
    const int n = nodes[a];
    d.u[a] = {state.u[2 * n], state.u[2 * n + 1]};
    d.uprev[a] = {prev.u[2 * n], prev.u[2 * n + 1]};
    d.adv[a] = {advect.u[2 * n], advect.u[2 * n + 1]};
    d.p[a] = state.p[n];
  }
  if (bubble) {
    d.nb = 5;
    auto bub = [e](const FieldState& s) {
      return s.has_bubble() ? Vec2(s.bubble[2 * e], s.bubble[2 * e + 1]) : Vec2::Zero();
    };
    d.u[4] = bub(state);
    d.uprev[4] = bub(prev);
    d.adv[4] = bub(advect);
  }
  return d;
}

using ElemMat = Eigen::Matrix<double, kMax, kMax>;
using ElemVec = Eigen::Matrix<double, kMax, 1>;

// Element residual and (optionally) frozen-coefficient tangent.
void element_kernel(const NsProblem& pb, int e, const ElementData& d, ElemVec& re, ElemMat* ke) {
  const GridMesh& mesh = *pb.mesh;
  const bool bubble = pb.bubble;
  const double dt = pb.dt;
  const double h = mesh.h_ele();
  re.setZero();
  if (ke != nullptr) ke->setZero();

  Vec2 a_center = Vec2::Zero();
  {
    const BasisEval bc = shape_eval(mesh, e, 0.0, 0.0, bubble);
    for (int a = 0; a < d.nb; ++a) a_center += bc.n[a] * d.adv[a];
  }
  const double speed = a_center.norm();

  static const QuadratureRule rule2 = QuadratureRule::gauss(2);
  static const QuadratureRule rule3 = QuadratureRule::gauss(3);
  const QuadratureRule& rule = bubble ? rule3 : rule2;

  for (const QuadPoint& qp : rule.points) {
    const BasisEval b = shape_eval(mesh, e, qp.xi, qp.eta, bubble);
    const double w = qp.weight * b.detJ;
    const Vec2 x = mesh.to_physical(e, Vec2(qp.xi, qp.eta));
    const PhaseProperties props = pb.properties(e, x);
    const double rho = props.rho;
    const double mu = props.mu;
    StabParams tau;
    if (pb.stabilized) tau = compute_tau(props, speed, h, dt);

    Vec2 uq = Vec2::Zero();
    Vec2 upq = Vec2::Zero();
    Vec2 aq = Vec2::Zero();
    Mat2 gu = Mat2::Zero();
    for (int a = 0; a < d.nb; ++a) {
      uq += b.n[a] * d.u[a];
      upq += b.n[a] * d.uprev[a];
      aq += b.n[a] * d.adv[a];
      gu.col(0) += b.dn_dx[a] * d.u[a];
      gu.col(1) += b.dn_dy[a] * d.u[a];
    }
    double pq = 0.0;
    Vec2 gp = Vec2::Zero();
    for (int a = 0; a < 4; ++a) {
      pq += b.n[a] * d.p[a];
      gp += Vec2(b.dn_dx[a], b.dn_dy[a]) * d.p[a];
    }
    const Vec2 inertia = rho * (uq - upq) / dt + rho * gu * aq;
    const Vec2 rm = inertia + gp - props.body_force;
    const double div = gu.trace();

    std::array<double, 5> advn{};
    for (int a = 0; a < d.nb; ++a) advn[a] = aq.x() * b.dn_dx[a] + aq.y() * b.dn_dy[a];

    for (int a = 0; a < d.nb; ++a) {
      const Vec2 gna(b.dn_dx[a], b.dn_dy[a]);
      for (int i = 0; i < 2; ++i) {
        const double galerkin = b.n[a] * (inertia[i] - props.body_force[i]) +
                                mu * gna.dot(gu.row(i).transpose()) - gna[i] * pq;
        const double stab = tau.tau_M * rho * advn[a] * rm[i] + tau.tau_m * gna[i] * div;
        re[vel_index(a, i)] += w * (galerkin + stab);
      }
    }
    for (int a = 0; a < 4; ++a) {
      const Vec2 gna(b.dn_dx[a], b.dn_dy[a]);
      re[pres_index(a)] += w * (b.n[a] * div + tau.tau_M * gna.dot(rm));
    }

    if (ke == nullptr) continue;
    ElemMat& k = *ke;
    for (int a = 0; a < d.nb; ++a) {
      const Vec2 gna(b.dn_dx[a], b.dn_dy[a]);
      for (int c = 0; c < d.nb; ++c) {
        const Vec2 gnc(b.dn_dx[c], b.dn_dy[c]);
        const double lc = rho * (b.n[c] / dt + advn[c]);
        const double m = b.n[a] * lc + mu * gna.dot(gnc) + tau.tau_M * rho * advn[a] * lc;
        for (int i = 0; i < 2; ++i) {
          k(vel_index(a, i), vel_index(c, i)) += w * m;
          for (int kk = 0; kk < 2; ++kk) {
            k(vel_index(a, i), vel_index(c, kk)) += w * tau.tau_m * gna[i] * gnc[kk];
          }
        }
      }
      for (int c = 0; c < 4; ++c) {
        const Vec2 gnc(b.dn_dx[c], b.dn_dy[c]);
        for (int i = 0; i < 2; ++i) {
          k(vel_index(a, i), pres_index(c)) += w * (-gna[i] * b.n[c] + tau.tau_M * rho * advn[a] * gnc[i]);
        }
      }
    }
    for (int a = 0; a < 4; ++a) {
      const Vec2 gna(b.dn_dx[a], b.dn_dy[a]);
      for (int c = 0; c < d.nb; ++c) {
        const Vec2 gnc(b.dn_dx[c], b.dn_dy[c]);
        const double lc = rho * (b.n[c] / dt + advn[c]);
        for (int kk = 0; kk < 2; ++kk) {
          k(pres_index(a), vel_index(c, kk)) += w * (b.n[a] * gnc[kk] + tau.tau_M * gna[kk] * lc);
        }
      }
      for (int c = 0; c < 4; ++c) {
        const Vec2 gnc(b.dn_dx[c], b.dn_dy[c]);
        k(pres_index(a), pres_index(c)) += w * tau.tau_M * gna.dot(gnc);
      }
    }
  }

  // Extra stress, always on the 2x2 sample points.
  if (!pb.extra_stress.empty()) {
    const auto& pts = gauss2x2_points();
    for (int q = 0; q < 4; ++q) {
      const SymTensor2& s = pb.extra_stress[static_cast<std::size_t>(4 * e + q)];
      if (s.xx == 0.0 && s.yy == 0.0 && s.xy == 0.0) continue;
      const BasisEval b = shape_eval(mesh, e, pts[q].x(), pts[q].y(), bubble);
      const double w = b.detJ;
      for (int a = 0; a < d.nb; ++a) {
        re[vel_index(a, 0)] += w * (b.dn_dx[a] * s.xx + b.dn_dy[a] * s.xy);
        re[vel_index(a, 1)] += w * (b.dn_dx[a] * s.xy + b.dn_dy[a] * s.yy);
      }
    }
  }
}

std::array<int, kNodal> global_dofs(const GridMesh& mesh, int e) {
  const DofLayout layout{mesh.node_count()};
  const auto nodes = mesh.element_nodes(e);
  std::array<int, kNodal> g{};
  for (int a = 0; a < 4; ++a) {
    g[vel_index(a, 0)] = layout.velocity(nodes[a], 0);
    g[vel_index(a, 1)] = layout.velocity(nodes[a], 1);
    g[pres_index(a)] = layout.pressure(nodes[a]);
  }
  return g;
}

}  // namespace

NsAssembler::NsAssembler(const GridMesh& mesh) : mesh_(&mesh) {
  const int n = DofLayout{mesh.node_count()}.size();
  const int ne = mesh.element_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(ne) * kNodal * kNodal);
  for (int e = 0; e < ne; ++e) {
    const auto g = global_dofs(mesh, e);
    for (int r : g) {
      for (int c : g) trip.emplace_back(r, c, 0.0);
    }
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(trip.begin(), trip.end());
  pattern_.makeCompressed();

  slots_.resize(static_cast<std::size_t>(ne) * kNodal * kNodal);
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  for (int e = 0; e < ne; ++e) {
    const auto g = global_dofs(mesh, e);
    for (int r = 0; r < kNodal; ++r) {
      for (int c = 0; c < kNodal; ++c) {
        const int col = g[c];
        const int* it = std::lower_bound(inner + outer[col], inner + outer[col + 1], g[r]);
        slots_[static_cast<std::size_t>(e) * kNodal * kNodal + r * kNodal + c] =
            static_cast<int>(it - inner);
      }
    }
  }
}

void NsAssembler::check_sizes(const NsProblem& pb, const FieldState& state, const FieldState& prev,
                              const FieldState& advect) const {
  if (pb.mesh != mesh_) throw std::invalid_argument("NsAssembler: problem refers to a different grid");
  if (!pb.properties) throw std::invalid_argument("NsAssembler: property function is empty");
  if (!(pb.dt > 0.0)) throw std::invalid_argument("NsAssembler: dt must be positive");
  const int nn = mesh_->node_count();
  const int ne = mesh_->element_count();
  for (const FieldState* s : {&state, &prev, &advect}) {
    if (s->u.size() != 2 * nn || s->p.size() != nn) {
      throw std::invalid_argument("NsAssembler: field sizes do not match the grid");
    }
    if (s->has_bubble() && s->bubble.size() != 2 * ne) {
      throw std::invalid_argument("NsAssembler: bubble storage does not match the grid");
    }
  }
  if (pb.bubble && !state.has_bubble()) {
    throw std::invalid_argument("NsAssembler: bubble enrichment requested but state has no bubble storage");
  }
  if (!pb.extra_stress.empty() && pb.extra_stress.size() != static_cast<std::size_t>(4 * ne)) {
    throw std::invalid_argument("NsAssembler: extra stress must hold 4 points per element");
  }
}

Eigen::VectorXd NsAssembler::residual(const NsProblem& pb, const FieldState& state, const FieldState& prev,
                                      const FieldState& advect) const {
  check_sizes(pb, state, prev, advect);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(DofLayout{mesh_->node_count()}.size());
  ElemVec re;
  for (int e = 0; e < mesh_->element_count(); ++e) {
    const ElementData d = gather(*mesh_, e, state, prev, advect, pb.bubble);
    element_kernel(pb, e, d, re, nullptr);
    const auto g = global_dofs(*mesh_, e);
    for (int i = 0; i < kNodal; ++i) r[g[i]] += re[i];
  }
  return r;
}

LinearSystem NsAssembler::system(const NsProblem& pb, const FieldState& state, const FieldState& prev,
                                 const FieldState& advect) const {
  check_sizes(pb, state, prev, advect);
  LinearSystem sys;
  sys.mesh = mesh_;
  sys.layout = DofLayout{mesh_->node_count()};
  sys.matrix = pattern_;
  std::fill(sys.matrix.valuePtr(), sys.matrix.valuePtr() + sys.matrix.nonZeros(), 0.0);
  sys.rhs = Eigen::VectorXd::Zero(sys.layout.size());
  if (pb.bubble) sys.bubble.resize(static_cast<std::size_t>(mesh_->element_count()));

  double* values = sys.matrix.valuePtr();
  ElemVec re;
  ElemMat ke;
  for (int e = 0; e < mesh_->element_count(); ++e) {
    const ElementData d = gather(*mesh_, e, state, prev, advect, pb.bubble);
    element_kernel(pb, e, d, re, &ke);
    Eigen::Matrix<double, kNodal, kNodal> kc = ke.topLeftCorner<kNodal, kNodal>();
    Eigen::Matrix<double, kNodal, 1> rc = re.head<kNodal>();
    if (pb.bubble) {
      BubbleBlock& bb = sys.bubble[static_cast<std::size_t>(e)];
      const Eigen::Matrix2d kbb = ke.bottomRightCorner<2, 2>();
      bb.kbb_inv = kbb.inverse();
      bb.kbc = ke.bottomLeftCorner<2, kNodal>();
      bb.rb = re.tail<2>();
      const Eigen::Matrix<double, kNodal, 2> kcb = ke.topRightCorner<kNodal, 2>();
      kc -= kcb * bb.kbb_inv * bb.kbc;
      rc -= kcb * bb.kbb_inv * bb.rb;
    }
    const auto g = global_dofs(*mesh_, e);
    const int* slot = &slots_[static_cast<std::size_t>(e) * kNodal * kNodal];
    for (int r = 0; r < kNodal; ++r) {
      sys.rhs[g[r]] -= rc[r];
      for (int c = 0; c < kNodal; ++c) values[slot[r * kNodal + c]] += kc(r, c);
    }
  }
  return sys;
}

Eigen::VectorXd assemble_residual(const NsProblem& problem, const FieldState& state, const FieldState& prev,
                                  const FieldState* advect) {
  if (problem.mesh == nullptr) throw std::invalid_argument("assemble_residual: problem has no grid");
  return NsAssembler(*problem.mesh).residual(problem, state, prev, advect != nullptr ? *advect : state);
}

LinearSystem assemble_tangent(const NsProblem& problem, const FieldState& state, const FieldState* advect) {
  if (problem.mesh == nullptr) throw std::invalid_argument("assemble_tangent: problem has no grid");
  return NsAssembler(*problem.mesh).system(problem, state, state, advect != nullptr ? *advect : state);
}

void apply_dirichlet(LinearSystem& sys, const DirichletSet& bc, const FieldState& state) {
  const int n = sys.layout.size();
  if (sys.matrix.rows() != n || sys.rhs.size() != n) {
    throw std::invalid_argument("apply_dirichlet: system is not sized to its layout");
  }
  if (sys.fixed.empty()) {
    sys.fixed.assign(static_cast<std::size_t>(n), 0);
    sys.fixed_increment = Eigen::VectorXd::Zero(n);
  }
  const int nv = sys.layout.velocity_count();
  for (const auto& [dof, value] : bc.values) {
    if (dof < 0 || dof >= n) {
      throw std::invalid_argument("apply_dirichlet: unknown index " + std::to_string(dof) + " out of range");
    }
    const double current = dof < nv ? state.u[dof] : state.p[dof - nv];
    sys.fixed[static_cast<std::size_t>(dof)] = 1;
    sys.fixed_increment[dof] = value - current;
  }
  for (int col = 0; col < sys.matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(sys.matrix, col); it; ++it) {
      if (sys.fixed[static_cast<std::size_t>(it.row())] != 0) {
        it.valueRef() = it.row() == it.col() ? 1.0 : 0.0;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (sys.fixed[static_cast<std::size_t>(i)] != 0) sys.rhs[i] = sys.fixed_increment[i];
  }
}

FieldState apply_increment(const FieldState& state, const LinearSystem& sys, const Eigen::VectorXd& dx,
                           double dt) {
  const int nv = sys.layout.velocity_count();
  const int nn = sys.layout.nodes;
  if (dx.size() < sys.layout.size()) {
    throw std::invalid_argument("apply_increment: increment vector is too short");
  }
  FieldState next = state;
  next.u += dx.head(nv);
  next.p += dx.segment(nv, nn);
  next.t = state.t + dt;
  if (!sys.bubble.empty()) {
    if (!state.has_bubble()) throw std::invalid_argument("apply_increment: state has no bubble storage");
    if (sys.mesh == nullptr) throw std::invalid_argument("apply_increment: system has no grid");
    for (int e = 0; e < sys.mesh->element_count(); ++e) {
      const auto g = global_dofs(*sys.mesh, e);
      Eigen::Matrix<double, kNodal, 1> dc;
      for (int i = 0; i < kNodal; ++i) dc[i] = dx[g[i]];
      const BubbleBlock& bb = sys.bubble[static_cast<std::size_t>(e)];
      const Eigen::Vector2d db = -bb.kbb_inv * (bb.rb + bb.kbc * dc);
      next.bubble[2 * e] += db[0];
      next.bubble[2 * e + 1] += db[1];
    }
  }
  return next;
}

FieldState step_explicit(const FieldState& state, const LinearSystem& sys, double dt) {
  const Eigen::VectorXd dx = solve_sparse(sys.matrix, sys.rhs, "step_explicit");
  return apply_increment(state, sys, dx, dt);
}

double continuity_residual_norm(const NsProblem& problem, const FieldState& state, const FieldState& prev) {
  const Eigen::VectorXd r = assemble_residual(problem, state, prev);
  const int nn = problem.mesh->node_count();
  return r.tail(nn).norm();
}

}  // namespace vmsfem
