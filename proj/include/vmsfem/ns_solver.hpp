#pragma once

#include "vmsfem/fields.hpp"
#include "vmsfem/linear_solver.hpp"
#include "vmsfem/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace vmsfem {

/// Stabilization parameters of one quadrature point. tau_M multiplies the
/// momentum strong residual (s m^3/kg); tau_m is the grad-div coefficient (Pa s).
struct StabParams {
  double tau_M = 0.0;
  double tau_m = 0.0;
};

/// tau_M = (rho/dt + 2 rho |u| / h + 4 mu / h^2)^-1 and tau_m = h^2 / (4 tau_M).
/// dt may be +infinity (steady limit).
StabParams compute_tau(const PhaseProperties& props, double speed, double h, double dt);

/// Material properties as a function of element and physical position.
using PropertyFn = std::function<PhaseProperties(int elem, const Vec2& x)>;

PropertyFn uniform_properties(const PhaseProperties& props);

/// Global unknown numbering: velocity (2 per node, interleaved), then pressure.
struct DofLayout {
  int nodes = 0;

  [[nodiscard]] int velocity(int node, int comp) const { return 2 * node + comp; }
  [[nodiscard]] int pressure(int node) const { return 2 * nodes + node; }
  [[nodiscard]] int velocity_count() const { return 2 * nodes; }
  [[nodiscard]] int size() const { return 3 * nodes; }
};

/// Everything the momentum/continuity assembly needs besides the unknowns.
struct NsProblem {
  const GridMesh* mesh = nullptr;
  PropertyFn properties;
  /// Extra stress at the 2x2 Gauss points, index 4*elem + q. Empty means zero.
  std::span<const SymTensor2> extra_stress;
  double dt = 1e-3;
  bool bubble = false;
  /// false drops every VMS term (tau_M = tau_m = 0).
  bool stabilized = true;
};

/// Element-level data needed to recover the condensed bubble increments.
struct BubbleBlock {
  Eigen::Matrix2d kbb_inv = Eigen::Matrix2d::Zero();
  Eigen::Matrix<double, 2, 12> kbc = Eigen::Matrix<double, 2, 12>::Zero();
  Eigen::Vector2d rb = Eigen::Vector2d::Zero();
};

/// Tangent matrix and out-of-balance vector over the nodal unknowns
/// [u; p], with the bubble unknowns statically condensed.
///
/// matrix = d(residual)/d[u; p] with advection velocity and stabilization
/// parameters frozen; rhs = -residual. After apply_dirichlet, fixed rows are
/// identity rows carrying the prescribed increment.
struct LinearSystem {
  const GridMesh* mesh = nullptr;
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  DofLayout layout;
  std::vector<BubbleBlock> bubble;
  std::vector<char> fixed;
  Eigen::VectorXd fixed_increment;

  [[nodiscard]] bool is_fixed(int dof) const { return !fixed.empty() && fixed[dof] != 0; }
};

/// Prescribed absolute values of individual unknowns.
struct DirichletSet {
  std::vector<std::pair<int, double>> values;

  void add(int dof, double value) { values.emplace_back(dof, value); }
};

/// Velocity fixed on every outer edge plus one pinned pressure node. `symmetry_top`
/// frees the tangential component on the top edge (only u_y = 0 there).
DirichletSet no_slip_box(const GridMesh& mesh, bool symmetry_top, int pressure_pin_node);

/// Assembles residual and tangent; the element sparsity pattern is built
/// once per grid and reused.
class NsAssembler {
 public:
  explicit NsAssembler(const GridMesh& mesh);

  /// Nodal weak residual [R^M; R^m] (internal minus external); bubble rows omitted.
  [[nodiscard]] Eigen::VectorXd residual(const NsProblem& problem, const FieldState& state,
                                         const FieldState& prev, const FieldState& advect) const;

  /// Tangent and condensed out-of-balance vector at `state`.
  [[nodiscard]] LinearSystem system(const NsProblem& problem, const FieldState& state,
                                    const FieldState& prev, const FieldState& advect) const;

 private:
  const GridMesh* mesh_;
  SparseMatrix pattern_;
  std::vector<int> slots_;  // 144 value slots per element

  void check_sizes(const NsProblem& problem, const FieldState& state, const FieldState& prev,
                   const FieldState& advect) const;
};

/// Free-function forms. assemble_residual uses `state` as advection velocity
/// unless `advect` is given.
Eigen::VectorXd assemble_residual(const NsProblem& problem, const FieldState& state,
                                  const FieldState& prev, const FieldState* advect = nullptr);
LinearSystem assemble_tangent(const NsProblem& problem, const FieldState& state,
                              const FieldState* advect = nullptr);

/// Replaces the rows of fixed unknowns by identity rows whose right-hand side
/// is the increment that reaches the prescribed value from `state`.
void apply_dirichlet(LinearSystem& system, const DirichletSet& bc, const FieldState& state);

/// New state from nodal increments dx = [du; dp]; recovers the bubble increments.
FieldState apply_increment(const FieldState& state, const LinearSystem& system,
                           const Eigen::VectorXd& dx, double dt);

/// One explicit step: solves system.matrix * dx = system.rhs and advances t by dt.
FieldState step_explicit(const FieldState& state, const LinearSystem& system, double dt);

/// L2 norm of the stabilized continuity residual (the pressure rows).
double continuity_residual_norm(const NsProblem& problem, const FieldState& state,
                                const FieldState& prev);

}  // namespace vmsfem
