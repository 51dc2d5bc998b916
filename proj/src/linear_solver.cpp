#include "vmsfem/linear_solver.hpp"

#include "vmsfem/fields.hpp"

#include <Eigen/SparseLU>
#ifdef VMSFEM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <sstream>

namespace vmsfem {

const char* sparse_backend_name() {
#ifdef VMSFEM_HAVE_UMFPACK
  return "umfpack";
#else
  return "sparselu";
#endif
}

Eigen::VectorXd solve_sparse(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                             const std::string& context) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != rhs.size()) {
    throw std::invalid_argument(context + ": system dimensions are inconsistent");
  }
  if (matrix.rows() == 0) return Eigen::VectorXd();
  if (!rhs.allFinite()) {
    throw SolverFailure(context + ": right-hand side contains non-finite entries");
  }

#ifdef VMSFEM_HAVE_UMFPACK
  Eigen::UmfPackLU<SparseMatrix> lu;
  lu.compute(matrix);
#else
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(matrix);
#endif
  if (lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << context << ": factorization failed (" << sparse_backend_name() << ", n=" << matrix.rows()
        << ", nnz=" << matrix.nonZeros() << "); the system is singular or numerically rank deficient";
    throw SolverFailure(msg.str());
  }
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw SolverFailure(context + ": back substitution produced a non-finite solution");
  }
  return x;
}

}  // namespace vmsfem
