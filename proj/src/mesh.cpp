#include "vmsfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vmsfem {

GridMesh::GridMesh(int nx, int ny, const Rect& extent)
    : nx_(nx), ny_(ny), x0_(extent.x0), y0_(extent.y0) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("GridMesh: element counts must be >= 1 (got nx=" +
                                std::to_string(nx) + ", ny=" + std::to_string(ny) + ")");
  }
  if (!(extent.width() > 0.0) || !(extent.height() > 0.0)) {
    throw std::invalid_argument("GridMesh: extent must have positive side lengths");
  }
  hx_ = extent.width() / nx;
  hy_ = extent.height() / ny;
}

Vec2 GridMesh::node(int n) const {
  const int i = n % (nx_ + 1);
  const int j = n / (nx_ + 1);
  return {x0_ + i * hx_, y0_ + j * hy_};
}

std::array<int, 4> GridMesh::element_nodes(int e) const {
  const int i = e % nx_;
  const int j = e / nx_;
  return {node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1)};
}

Vec2 GridMesh::element_center(int e) const {
  const int i = e % nx_;
  const int j = e / nx_;
  return {x0_ + (i + 0.5) * hx_, y0_ + (j + 0.5) * hy_};
}

Vec2 GridMesh::to_physical(int e, const Vec2& ref) const {
  const Vec2 c = element_center(e);
  return {c.x() + 0.5 * hx_ * ref.x(), c.y() + 0.5 * hy_ * ref.y()};
}

std::optional<PointLocation> GridMesh::locate(const Vec2& x) const {
  const double sx = (x.x() - x0_) / hx_;
  const double sy = (x.y() - y0_) / hy_;
  constexpr double tol = 1e-12;
  if (!(sx >= -tol && sx <= nx_ + tol && sy >= -tol && sy <= ny_ + tol)) {
    return std::nullopt;
  }
  const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, ny_ - 1);
  PointLocation loc;
  loc.element = element_id(i, j);
  loc.ref = {2.0 * (sx - i) - 1.0, 2.0 * (sy - j) - 1.0};
  return loc;
}

Vec2 GridMesh::clamp(const Vec2& x) const {
  const Rect r = extent();
  return {std::clamp(x.x(), r.x0, r.x1), std::clamp(x.y(), r.y0, r.y1)};
}

std::vector<std::array<int, 2>> GridMesh::edges() const {
  std::vector<std::array<int, 2>> out;
  out.reserve(static_cast<std::size_t>(nx_ * (ny_ + 1) + (nx_ + 1) * ny_));
  for (int j = 0; j <= ny_; ++j) {
    for (int i = 0; i < nx_; ++i) out.push_back({node_id(i, j), node_id(i + 1, j)});
  }
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i <= nx_; ++i) out.push_back({node_id(i, j), node_id(i, j + 1)});
  }
  return out;
}

bool GridMesh::is_boundary_node(int n) const {
  const int i = n % (nx_ + 1);
  const int j = n / (nx_ + 1);
  return i == 0 || j == 0 || i == nx_ || j == ny_;
}

QuadratureRule QuadratureRule::gauss(int points_per_axis) {
  std::vector<double> x;
  std::vector<double> w;
  switch (points_per_axis) {
    case 1:
      x = {0.0};
      w = {2.0};
      break;
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      x = {-a, a};
      w = {1.0, 1.0};
      break;
    }
    case 3: {
      const double a = std::sqrt(0.6);
      x = {-a, 0.0, a};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    }
    default:
      throw std::invalid_argument("QuadratureRule::gauss: supported orders are 1, 2, 3");
  }
  QuadratureRule rule;
  for (std::size_t j = 0; j < x.size(); ++j) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      rule.points.push_back({x[i], x[j], w[i] * w[j]});
    }
  }
  return rule;
}

BasisEval shape_eval(const GridMesh& mesh, int elem, double xi, double eta, bool bubble) {
  if (elem < 0 || elem >= mesh.element_count()) {
    throw std::invalid_argument("shape_eval: element id " + std::to_string(elem) + " out of range");
  }
  static constexpr std::array<double, 4> sx{-1.0, 1.0, 1.0, -1.0};
  static constexpr std::array<double, 4> sy{-1.0, -1.0, 1.0, 1.0};
  const double dxi_dx = 2.0 / mesh.hx();
  const double deta_dy = 2.0 / mesh.hy();

  BasisEval b;
  b.bubble_active = bubble;
  b.detJ = 0.25 * mesh.hx() * mesh.hy();
  for (int a = 0; a < 4; ++a) {
    const double fx = 1.0 + sx[a] * xi;
    const double fy = 1.0 + sy[a] * eta;
    b.n[a] = 0.25 * fx * fy;
    b.dn_dx[a] = 0.25 * sx[a] * fy * dxi_dx;
    b.dn_dy[a] = 0.25 * fx * sy[a] * deta_dy;
  }
  if (bubble) {
    b.n[4] = (1.0 - xi * xi) * (1.0 - eta * eta);
    b.dn_dx[4] = -2.0 * xi * (1.0 - eta * eta) * dxi_dx;
    b.dn_dy[4] = -2.0 * eta * (1.0 - xi * xi) * deta_dy;
  }
  return b;
}

const std::array<Vec2, 4>& gauss2x2_points() {
  static const std::array<Vec2, 4> pts = [] {
    const double a = 1.0 / std::sqrt(3.0);
    return std::array<Vec2, 4>{Vec2(-a, -a), Vec2(a, -a), Vec2(-a, a), Vec2(a, a)};
  }();
  return pts;
}

}  // namespace vmsfem
