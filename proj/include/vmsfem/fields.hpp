#pragma once

#include "vmsfem/mesh.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace vmsfem {

/// Raised when a linear solve cannot proceed (singular or rank-deficient system).
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an operation is called on an object in the wrong state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a scalar consistency equation has no bracketed root.
class ConsistencyFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// In-plane symmetric stress tensor (Pa).
struct SymTensor2 {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;

  [[nodiscard]] double mean() const { return 0.5 * (xx + yy); }
  [[nodiscard]] bool finite() const;
};

/// Nodal unknowns at one time level. Velocity is interleaved (2n, 2n+1);
/// the bubble array holds two velocity components per element and is empty
/// when the enrichment is disabled.
struct FieldState {
  Eigen::VectorXd u;
  Eigen::VectorXd p;
  Eigen::VectorXd bubble;
  double t = 0.0;

  static FieldState zeros(const GridMesh& mesh, bool bubble);
  [[nodiscard]] bool has_bubble() const { return bubble.size() > 0; }
  [[nodiscard]] bool finite() const;
};

/// Material properties at a point of one phase (or a blend of phases).
struct PhaseProperties {
  double rho = 1.0;
  double mu = 0.0;
  Vec2 body_force = Vec2::Zero();
  bool has_history_stress = false;
};

/// Read-only velocity field: bilinear nodal interpolation plus the optional
/// element bubble.
class VelocityView {
 public:
  VelocityView(const GridMesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd* bubble = nullptr);
  VelocityView(const GridMesh& mesh, const FieldState& state);

  [[nodiscard]] const GridMesh& mesh() const { return *mesh_; }
  [[nodiscard]] Vec2 at(int elem, double xi, double eta) const;
  /// grad(i, j) = du_i / dx_j.
  [[nodiscard]] Mat2 gradient(int elem, double xi, double eta) const;
  /// Velocity at a physical point; points outside the grid are clamped first.
  [[nodiscard]] Vec2 at(const Vec2& x) const;
  [[nodiscard]] Vec2 nodal(int node) const { return {(*u_)[2 * node], (*u_)[2 * node + 1]}; }

 private:
  const GridMesh* mesh_;
  const Eigen::VectorXd* u_;
  const Eigen::VectorXd* bubble_;
};

}  // namespace vmsfem
