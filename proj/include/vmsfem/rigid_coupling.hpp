#pragma once

#include "vmsfem/fields.hpp"
#include "vmsfem/mesh.hpp"
#include "vmsfem/ns_solver.hpp"

#include <Eigen/Core>

#include <array>
#include <string>
#include <variant>
#include <vector>

namespace vmsfem {

enum class FrictionModel { non_slip, slip, coulomb };

FrictionModel parse_friction_model(const std::string& name);
const char* to_string(FrictionModel model);

struct Circle {
  Vec2 center = Vec2::Zero();
  double radius = 0.5;
};

/// Ordered vertices; a closed polyline is a polygon (counter-clockwise for
/// outward normals), an open one is a zero-thickness plate.
struct Polyline {
  std::vector<Vec2> vertices;
  bool closed = false;
};

/// Rigid body with prescribed translation.
class RigidBody {
 public:
  RigidBody(Circle shape, FrictionModel friction, double mu_fric = 0.0);
  RigidBody(Polyline shape, FrictionModel friction, double mu_fric = 0.0);

  [[nodiscard]] const std::variant<Circle, Polyline>& shape() const { return shape_; }
  [[nodiscard]] FrictionModel friction() const { return friction_; }
  [[nodiscard]] double mu_fric() const { return mu_fric_; }
  [[nodiscard]] const Vec2& velocity() const { return velocity_; }
  void set_velocity(const Vec2& v) { velocity_ = v; }
  void translate(const Vec2& d);

  /// Signed distance (negative inside) for circles and closed polylines;
  /// unsigned distance for open polylines.
  [[nodiscard]] double distance(const Vec2& x) const;
  /// Points within `tol` of the boundary count as inside.
  [[nodiscard]] bool contains(const Vec2& x, double tol) const;
  /// Lowest point of the body.
  [[nodiscard]] double bottom() const;
  [[nodiscard]] Vec2 reference_point() const;

 private:
  std::variant<Circle, Polyline> shape_;
  FrictionModel friction_;
  double mu_fric_;
  Vec2 velocity_ = Vec2::Zero();
};

struct CuttingPoint {
  std::array<int, 2> edge{};
  double alpha = 0.5;
  Vec2 position = Vec2::Zero();
  Vec2 normal = Vec2::UnitX();
  Vec2 tangent = Vec2::UnitY();
};

struct CutResult {
  std::vector<CuttingPoint> points;
  std::vector<int> inside_nodes;
};

/// Intersections of the body boundary with grid edges, plus nodes inside the
/// body. A crossing within 1e-12 h of a node is not reported; that node is
/// classified inside instead.
CutResult find_cutting_points(const RigidBody& body, const GridMesh& mesh);

/// One scalar row sum_k coef_k u[dof_k] = rhs over velocity unknowns.
struct ConstraintRow {
  std::array<int, 4> dof{};
  std::array<double, 4> coef{};
  int count = 0;
  double rhs = 0.0;
  /// Direction of the reaction carried by this row.
  Vec2 direction = Vec2::UnitX();
  /// Cutting point index, or -1 for inside-node rows.
  int point = -1;
};

struct ConstraintSet {
  std::vector<ConstraintRow> rows;
  std::vector<CuttingPoint> points;
  std::vector<int> inside_nodes;
  FrictionModel model = FrictionModel::non_slip;
  Vec2 body_velocity = Vec2::Zero();
  int duplicates_removed = 0;

  /// Filled by a solve. lambda[r] is the force of the body on the material
  /// along rows[r].direction; friction[p] the tangential force at point p.
  Eigen::VectorXd lambda;
  std::vector<double> friction;
  bool solved = false;

  [[nodiscard]] SparseMatrix a_matrix(int velocity_dofs) const;
  [[nodiscard]] Eigen::VectorXd b_vector() const;
  /// max_r |A u - b|_r.
  [[nodiscard]] double violation(const Eigen::VectorXd& u) const;
};

ConstraintSet build_constraints(const CutResult& cut, const RigidBody& body);

struct SaddleResult {
  Eigen::VectorXd dx;
};

/// Solves [J sA^T; sA 0][dx; y] = [rhs; s(b - A u^t)] with the Dirichlet rows
/// of `system` already applied. Fills constraints.lambda.
SaddleResult solve_saddle(const LinearSystem& system, ConstraintSet& constraints, const FieldState& state);

/// Slip solve, friction force from the slip multipliers, one re-solve with the
/// friction as an external nodal load.
SaddleResult coulomb_iteration(const LinearSystem& system, ConstraintSet& constraints, const FieldState& state,
                               double mu_fric);

/// Force exerted by the material on the body (per unit depth).
Vec2 resultant_force(const ConstraintSet& constraints);

}  // namespace vmsfem
