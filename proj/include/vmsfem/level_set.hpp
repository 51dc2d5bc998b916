#pragma once

#include "vmsfem/fields.hpp"
#include "vmsfem/linear_solver.hpp"
#include "vmsfem/mesh.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace vmsfem {

/// Nodal level-set values, one array per tracked interface. With one array,
/// phase 1 is phi >= 0 and phase 2 is phi < 0.
struct PhaseField {
  std::vector<Eigen::VectorXd> phi;
  double beta1 = 0.5;
  double interface_halfwidth = 0.0;

  [[nodiscard]] bool finite() const;
};

struct PenaltyTerms {
  double k1 = 0.0;
  double lambda1 = 0.0;
};

/// k1 = 1 - 1/|grad phi| (0 where |grad phi| < 0.1) and lambda1 = beta1 h^2 |u| / 2.
PenaltyTerms compute_penalty_terms(const Vec2& grad_phi, double speed, double h, double beta1);

/// tau = h / (2|u| + h/dt).
double levelset_tau(double speed, double h, double dt);

/// Weighted mass, convection and penalty diffusion matrices.
struct LevelSetSystem {
  SparseMatrix m_matrix;
  SparseMatrix c_matrix;
  SparseMatrix k_matrix;
};

LevelSetSystem assemble_levelset(const GridMesh& mesh, const Eigen::VectorXd& phi, const VelocityView& u,
                                 double dt, double beta1);

/// Solves (M/dt + C + K) dphi = -(C + K) phi and returns phi + dphi.
Eigen::VectorXd step_levelset(const Eigen::VectorXd& phi, const LevelSetSystem& system, double dt);

/// Advances every interface of `field` by one step.
void advance_phase_field(PhaseField& field, const GridMesh& mesh, const VelocityView& u, double dt);

/// 0.5 (1 + phi/eps + sin(pi phi/eps)/pi), clamped to [0, 1].
double smoothed_heaviside(double phi, double eps);

struct PhaseSample {
  int phase = 1;
  double indicator = 1.0;
};

/// Phase and smoothed indicator at x for a single interface.
PhaseSample phase_at(const GridMesh& mesh, const Eigen::VectorXd& phi, const Vec2& x, double eps);

/// Bilinear interpolation of a nodal scalar.
double interpolate_nodal(const GridMesh& mesh, const Eigen::VectorXd& values, int elem, const Vec2& ref);
Vec2 nodal_gradient(const GridMesh& mesh, const Eigen::VectorXd& values, int elem, const Vec2& ref);

/// Phase id (0-based) for `phase_count` materials from pairwise level sets,
/// ordered (0,1), (0,2), ..., (1,2), ...; phi_ij > 0 means i wins over j.
/// Cycles are broken by flipping the pair with the smallest |phi|.
int classify_phase(std::span<const double> pair_phi, int phase_count);

/// Node-averaged |grad phi| from the element-centre gradients.
Eigen::VectorXd recovered_gradient_norm(const GridMesh& mesh, const Eigen::VectorXd& phi);

/// Area of {phi < 0} by sub-sampling each element on an s x s lattice.
double negative_area(const GridMesh& mesh, const Eigen::VectorXd& phi, int subsamples);

}  // namespace vmsfem
