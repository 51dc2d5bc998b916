#include "vmsfem/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vmsfem {

bool PhaseField::finite() const {
  return std::all_of(phi.begin(), phi.end(), [](const Eigen::VectorXd& v) { return v.allFinite(); });
}

PenaltyTerms compute_penalty_terms(const Vec2& grad_phi, double speed, double h, double beta1) {
  PenaltyTerms t;
  const double g = grad_phi.norm();
  t.k1 = g < 0.1 ? 0.0 : 1.0 - 1.0 / g;
  t.lambda1 = beta1 * h * h * std::abs(speed) / 2.0;
  return t;
}

double levelset_tau(double speed, double h, double dt) {
  return h / (2.0 * std::abs(speed) + h / dt);
}

double interpolate_nodal(const GridMesh& mesh, const Eigen::VectorXd& values, int elem, const Vec2& ref) {
  const BasisEval b = shape_eval(mesh, elem, ref.x(), ref.y(), false);
  const auto nodes = mesh.element_nodes(elem);
  double v = 0.0;
  for (int a = 0; a < 4; ++a) v += b.n[a] * values[nodes[a]];
  return v;
}

Vec2 nodal_gradient(const GridMesh& mesh, const Eigen::VectorXd& values, int elem, const Vec2& ref) {
  const BasisEval b = shape_eval(mesh, elem, ref.x(), ref.y(), false);
  const auto nodes = mesh.element_nodes(elem);
  Vec2 g = Vec2::Zero();
  for (int a = 0; a < 4; ++a) g += Vec2(b.dn_dx[a], b.dn_dy[a]) * values[nodes[a]];
  return g;
}

LevelSetSystem assemble_levelset(const GridMesh& mesh, const Eigen::VectorXd& phi, const VelocityView& u,
                                 double dt, double beta1) {
  if (phi.size() != mesh.node_count()) {
    throw std::invalid_argument("assemble_levelset: phi size does not match the grid");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("assemble_levelset: dt must be positive");
  const double h = mesh.h_ele();
  const QuadratureRule rule = QuadratureRule::gauss(2);
  std::vector<Eigen::Triplet<double>> tm;
  std::vector<Eigen::Triplet<double>> tc;
  std::vector<Eigen::Triplet<double>> tk;
  const auto ne = static_cast<std::size_t>(mesh.element_count());
  tm.reserve(16 * ne);
  tc.reserve(16 * ne);
  tk.reserve(16 * ne);

  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    Eigen::Matrix4d me = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d ce = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
    for (const QuadPoint& qp : rule.points) {
      const BasisEval b = shape_eval(mesh, e, qp.xi, qp.eta, false);
      const double w = qp.weight * b.detJ;
      const Vec2 uq = u.at(e, qp.xi, qp.eta);
      const double speed = uq.norm();
      const double tau = levelset_tau(speed, h, dt);
      Vec2 gphi = Vec2::Zero();
      for (int a = 0; a < 4; ++a) gphi += Vec2(b.dn_dx[a], b.dn_dy[a]) * phi[nodes[a]];
      const PenaltyTerms pen = compute_penalty_terms(gphi, speed, h, beta1);
      const double diff = pen.lambda1 * pen.k1;
      std::array<double, 4> adv{};
      for (int a = 0; a < 4; ++a) adv[a] = uq.x() * b.dn_dx[a] + uq.y() * b.dn_dy[a];
      for (int a = 0; a < 4; ++a) {
        const double wa = b.n[a] + tau * adv[a];
        for (int c = 0; c < 4; ++c) {
          me(a, c) += w * wa * b.n[c];
          ce(a, c) += w * wa * adv[c];
          ke(a, c) += w * diff * (b.dn_dx[a] * b.dn_dx[c] + b.dn_dy[a] * b.dn_dy[c]);
        }
      }
    }
    for (int a = 0; a < 4; ++a) {
      for (int c = 0; c < 4; ++c) {
        tm.emplace_back(nodes[a], nodes[c], me(a, c));
        tc.emplace_back(nodes[a], nodes[c], ce(a, c));
        tk.emplace_back(nodes[a], nodes[c], ke(a, c));
      }
    }
  }
  const int n = mesh.node_count();
  LevelSetSystem sys;
  sys.m_matrix.resize(n, n);
  sys.c_matrix.resize(n, n);
  sys.k_matrix.resize(n, n);
  sys.m_matrix.setFromTriplets(tm.begin(), tm.end());
  sys.c_matrix.setFromTriplets(tc.begin(), tc.end());
  sys.k_matrix.setFromTriplets(tk.begin(), tk.end());
  return sys;
}

Eigen::VectorXd step_levelset(const Eigen::VectorXd& phi, const LevelSetSystem& sys, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_levelset: dt must be positive");
  if (phi.size() != sys.m_matrix.rows()) {
    throw std::invalid_argument("step_levelset: phi size does not match the system");
  }
  const SparseMatrix ck = sys.c_matrix + sys.k_matrix;
  const SparseMatrix lhs = sys.m_matrix / dt + ck;
  const Eigen::VectorXd rhs = -(ck * phi);
  const Eigen::VectorXd dphi = solve_sparse(lhs, rhs, "step_levelset");
  return phi + dphi;
}

void advance_phase_field(PhaseField& field, const GridMesh& mesh, const VelocityView& u, double dt) {
  for (Eigen::VectorXd& phi : field.phi) {
    const LevelSetSystem sys = assemble_levelset(mesh, phi, u, dt, field.beta1);
    phi = step_levelset(phi, sys, dt);
  }
}

double smoothed_heaviside(double phi, double eps) {
  if (!(eps > 0.0)) return phi >= 0.0 ? 1.0 : 0.0;
  if (phi >= eps) return 1.0;
  if (phi <= -eps) return 0.0;
  const double r = phi / eps;
  const double h = 0.5 * (1.0 + r + std::sin(std::numbers::pi * r) / std::numbers::pi);
  return std::clamp(h, 0.0, 1.0);
}

PhaseSample phase_at(const GridMesh& mesh, const Eigen::VectorXd& phi, const Vec2& x, double eps) {
  const auto loc = mesh.locate(x);
  if (!loc) throw std::invalid_argument("phase_at: point lies outside the grid");
  const double v = interpolate_nodal(mesh, phi, loc->element, loc->ref);
  return {v >= 0.0 ? 1 : 2, smoothed_heaviside(v, eps)};
}

int classify_phase(std::span<const double> pair_phi, int phase_count) {
  if (phase_count < 1) throw std::invalid_argument("classify_phase: need at least one phase");
  const auto pairs = static_cast<std::size_t>(phase_count * (phase_count - 1) / 2);
  if (pair_phi.size() != pairs) {
    throw std::invalid_argument("classify_phase: expected one level set per phase pair");
  }
  if (phase_count == 1) return 0;
  std::vector<double> v(pair_phi.begin(), pair_phi.end());
  std::vector<std::array<int, 2>> idx;
  for (int i = 0; i < phase_count; ++i) {
    for (int j = i + 1; j < phase_count; ++j) idx.push_back({i, j});
  }
  std::vector<char> flipped(pairs, 0);
  for (std::size_t attempt = 0; attempt <= pairs; ++attempt) {
    std::vector<int> wins(static_cast<std::size_t>(phase_count), 0);
    for (std::size_t k = 0; k < pairs; ++k) ++wins[static_cast<std::size_t>(v[k] >= 0.0 ? idx[k][0] : idx[k][1])];
    for (int p = 0; p < phase_count; ++p) {
      if (wins[static_cast<std::size_t>(p)] == phase_count - 1) return p;
    }
    std::size_t best = pairs;
    for (std::size_t k = 0; k < pairs; ++k) {
      if (flipped[k] != 0) continue;
      if (best == pairs || std::abs(v[k]) < std::abs(v[best])) best = k;
    }
    if (best == pairs) break;
    flipped[best] = 1;
    v[best] = v[best] >= 0.0 ? -1e-300 : 1e-300;
  }
  // Unresolvable: most wins, lowest id.
  std::vector<int> wins(static_cast<std::size_t>(phase_count), 0);
  for (std::size_t k = 0; k < pairs; ++k) ++wins[static_cast<std::size_t>(pair_phi[k] >= 0.0 ? idx[k][0] : idx[k][1])];
  return static_cast<int>(std::max_element(wins.begin(), wins.end()) - wins.begin());
}

Eigen::VectorXd recovered_gradient_norm(const GridMesh& mesh, const Eigen::VectorXd& phi) {
  Eigen::VectorXd gx = Eigen::VectorXd::Zero(mesh.node_count());
  Eigen::VectorXd gy = Eigen::VectorXd::Zero(mesh.node_count());
  Eigen::VectorXd cnt = Eigen::VectorXd::Zero(mesh.node_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Vec2 g = nodal_gradient(mesh, phi, e, Vec2::Zero());
    for (int n : mesh.element_nodes(e)) {
      gx[n] += g.x();
      gy[n] += g.y();
      cnt[n] += 1.0;
    }
  }
  Eigen::VectorXd out(mesh.node_count());
  for (int n = 0; n < mesh.node_count(); ++n) out[n] = std::hypot(gx[n], gy[n]) / cnt[n];
  return out;
}

double negative_area(const GridMesh& mesh, const Eigen::VectorXd& phi, int subsamples) {
  if (subsamples < 1) throw std::invalid_argument("negative_area: subsamples must be >= 1");
  const double cell = mesh.hx() * mesh.hy() / (subsamples * subsamples);
  double area = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    const double p0 = phi[nodes[0]];
    const double p1 = phi[nodes[1]];
    const double p2 = phi[nodes[2]];
    const double p3 = phi[nodes[3]];
    if (p0 < 0 && p1 < 0 && p2 < 0 && p3 < 0) {
      area += mesh.hx() * mesh.hy();
      continue;
    }
    if (p0 >= 0 && p1 >= 0 && p2 >= 0 && p3 >= 0) continue;
    for (int j = 0; j < subsamples; ++j) {
      const double t = (j + 0.5) / subsamples;
      for (int i = 0; i < subsamples; ++i) {
        const double s = (i + 0.5) / subsamples;
        const double v = (1 - s) * (1 - t) * p0 + s * (1 - t) * p1 + s * t * p2 + (1 - s) * t * p3;
        if (v < 0.0) area += cell;
      }
    }
  }
  return area;
}

}  // namespace vmsfem
