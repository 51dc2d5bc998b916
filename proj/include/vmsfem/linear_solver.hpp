#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>

namespace vmsfem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Sparse direct solve of a general (possibly indefinite) square system.
/// Throws SolverFailure naming `context` when the factorization fails or the
/// solution is not finite.
Eigen::VectorXd solve_sparse(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                             const std::string& context);

/// Name of the factorization backend compiled in ("umfpack" or "sparselu").
const char* sparse_backend_name();

}  // namespace vmsfem
