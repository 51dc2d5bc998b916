#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <vector>

namespace vmsfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  [[nodiscard]] double width() const { return x1 - x0; }
  [[nodiscard]] double height() const { return y1 - y0; }
};

/// Position of a point inside the grid: owning element and reference coordinates.
struct PointLocation {
  int element = -1;
  Vec2 ref = Vec2::Zero();
};

/// Structured quadrilateral Eulerian grid. Nodes are numbered row-major
/// (x fastest); element e = i + nx*j has counter-clockwise nodes
/// (i,j), (i+1,j), (i+1,j+1), (i,j+1).
class GridMesh {
 public:
  GridMesh(int nx, int ny, const Rect& extent);

  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }
  [[nodiscard]] double x0() const { return x0_; }
  [[nodiscard]] double y0() const { return y0_; }
  [[nodiscard]] double hx() const { return hx_; }
  [[nodiscard]] double hy() const { return hy_; }
  [[nodiscard]] Rect extent() const { return {x0_, y0_, x0_ + nx_ * hx_, y0_ + ny_ * hy_}; }

  [[nodiscard]] int node_count() const { return (nx_ + 1) * (ny_ + 1); }
  [[nodiscard]] int element_count() const { return nx_ * ny_; }

  /// Characteristic element length used by the stabilization terms.
  [[nodiscard]] double h_ele() const { return hx_ < hy_ ? hx_ : hy_; }

  [[nodiscard]] int node_id(int i, int j) const { return i + (nx_ + 1) * j; }
  [[nodiscard]] int element_id(int i, int j) const { return i + nx_ * j; }
  [[nodiscard]] Vec2 node(int n) const;
  [[nodiscard]] std::array<int, 4> element_nodes(int e) const;
  [[nodiscard]] Vec2 element_center(int e) const;

  /// Maps reference coordinates of element e to physical space.
  [[nodiscard]] Vec2 to_physical(int e, const Vec2& ref) const;

  /// Locates x in the grid; std::nullopt when x lies outside the extent.
  [[nodiscard]] std::optional<PointLocation> locate(const Vec2& x) const;

  /// Clamps x to the grid extent.
  [[nodiscard]] Vec2 clamp(const Vec2& x) const;

  /// All grid edges as node pairs: horizontal edges first, then vertical ones.
  [[nodiscard]] std::vector<std::array<int, 2>> edges() const;

  [[nodiscard]] bool is_boundary_node(int n) const;

 private:
  int nx_;
  int ny_;
  double x0_;
  double y0_;
  double hx_;
  double hy_;
};

struct QuadPoint {
  double xi;
  double eta;
  double weight;
};

/// Tensor-product Gauss rule on the reference square [-1,1]^2.
struct QuadratureRule {
  std::vector<QuadPoint> points;

  static QuadratureRule gauss(int points_per_axis);
};

/// Shape functions at one point of one element. Index 4 holds the bubble
/// (1 - xi^2)(1 - eta^2) when it is active.
struct BasisEval {
  std::array<double, 5> n{};
  std::array<double, 5> dn_dx{};
  std::array<double, 5> dn_dy{};
  double detJ = 0.0;
  bool bubble_active = false;

  [[nodiscard]] int count() const { return bubble_active ? 5 : 4; }
};

/// Evaluates the bilinear basis (plus bubble when requested) of element elem
/// at reference point (xi, eta). Throws std::invalid_argument for a bad id.
BasisEval shape_eval(const GridMesh& mesh, int elem, double xi, double eta, bool bubble);

/// Reference coordinates of the 2x2 Gauss points, in QuadratureRule::gauss(2)
/// order. History sample points live here.
const std::array<Vec2, 4>& gauss2x2_points();

}  // namespace vmsfem
