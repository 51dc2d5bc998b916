#include "vmsfem/fields.hpp"

#include <cmath>

namespace vmsfem {

bool SymTensor2::finite() const {
  return std::isfinite(xx) && std::isfinite(yy) && std::isfinite(xy);
}

FieldState FieldState::zeros(const GridMesh& mesh, bool bubble) {
  FieldState s;
  s.u = Eigen::VectorXd::Zero(2 * mesh.node_count());
  s.p = Eigen::VectorXd::Zero(mesh.node_count());
  if (bubble) s.bubble = Eigen::VectorXd::Zero(2 * mesh.element_count());
  return s;
}

bool FieldState::finite() const {
  return u.allFinite() && p.allFinite() && bubble.allFinite() && std::isfinite(t);
}

VelocityView::VelocityView(const GridMesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd* bubble)
    : mesh_(&mesh), u_(&u), bubble_(bubble != nullptr && bubble->size() > 0 ? bubble : nullptr) {
  if (u.size() != 2 * mesh.node_count()) {
    throw std::invalid_argument("VelocityView: velocity vector size does not match the grid");
  }
  if (bubble_ != nullptr && bubble_->size() != 2 * mesh.element_count()) {
    throw std::invalid_argument("VelocityView: bubble vector size does not match the grid");
  }
}

VelocityView::VelocityView(const GridMesh& mesh, const FieldState& state)
    : VelocityView(mesh, state.u, &state.bubble) {}

Vec2 VelocityView::at(int elem, double xi, double eta) const {
  const BasisEval b = shape_eval(*mesh_, elem, xi, eta, bubble_ != nullptr);
  const auto nodes = mesh_->element_nodes(elem);
  Vec2 v = Vec2::Zero();
  for (int a = 0; a < 4; ++a) v += b.n[a] * nodal(nodes[a]);
  if (bubble_ != nullptr) {
    v += b.n[4] * Vec2((*bubble_)[2 * elem], (*bubble_)[2 * elem + 1]);
  }
  return v;
}

Mat2 VelocityView::gradient(int elem, double xi, double eta) const {
  const BasisEval b = shape_eval(*mesh_, elem, xi, eta, bubble_ != nullptr);
  const auto nodes = mesh_->element_nodes(elem);
  Mat2 g = Mat2::Zero();
  auto add = [&](const Vec2& v, int a) {
    g(0, 0) += v.x() * b.dn_dx[a];
    g(0, 1) += v.x() * b.dn_dy[a];
    g(1, 0) += v.y() * b.dn_dx[a];
    g(1, 1) += v.y() * b.dn_dy[a];
  };
  for (int a = 0; a < 4; ++a) add(nodal(nodes[a]), a);
  if (bubble_ != nullptr) add(Vec2((*bubble_)[2 * elem], (*bubble_)[2 * elem + 1]), 4);
  return g;
}

Vec2 VelocityView::at(const Vec2& x) const {
  const auto loc = mesh_->locate(mesh_->clamp(x));
  return at(loc->element, loc->ref.x(), loc->ref.y());
}

}  // namespace vmsfem
