#pragma once

#include <functional>

#include "itereig/dense.hpp"
#include "itereig/types.hpp"

namespace itereig {

using LinearOp = std::function<Vector(const Vector&)>;

inline Vector identity_op(const Vector& v) { return v; }

struct SolveTrace {
    std::vector<double> residual_norms;  // ||r_0||, ||r_1||, ...
    std::size_t iterations = 0;
    bool converged = false;
    Vector solution;
    double final_tol = 0;
};

struct BlockSolveTrace {
    std::vector<double> residual_fro_norms;
    std::size_t iterations = 0;
    bool converged = false;
    DenseMatrix solution_block;
    double final_tol = 0;
};

// Full (unrestarted) right-preconditioned GMRES with zero initial guess,
// modified Gram-Schmidt plus one reorthogonalization pass and Givens-rotation
// least squares. Convergence is tested on the absolute residual by default
// (the outer iteration normalizes ||rhs|| = 1); set `relative` for
// ||r_k|| <= tol * ||r_0||.
SolveTrace gmres(const LinearOp& apply_B, const LinearOp& apply_Pinv, const Vector& rhs,
                 double tol, std::size_t max_it, bool relative = false);

// Block GMRES minimizing ||Y - B X_k||_F over the block Krylov space, with
// deflation of directions whose post-orthogonalization norm falls below
// 1e-12 times the initial block column norm. u = 1 reduces to gmres.
BlockSolveTrace block_gmres(const LinearOp& apply_B, const LinearOp& apply_Pinv,
                            const DenseMatrix& RHS, double tol, std::size_t max_it);

// Ritz values of the order-m Arnoldi projection. Early breakdown at step
// j < m returns the j Ritz values of the exact invariant subspace found.
std::vector<Complex> arnoldi_ritz(const LinearOp& apply_B, std::size_t n, std::size_t m,
                                  const Vector& seed);

// Eigenvalues of a small upper-Hessenberg matrix by shifted QR iteration.
// Restricted to diagnostics scale (m <= 50 enforced by arnoldi_ritz).
std::vector<Complex> hessenberg_eigenvalues(DenseMatrix H);

// Eigenvalues of a small dense matrix: Householder Hessenberg reduction
// followed by hessenberg_eigenvalues.
std::vector<Complex> small_dense_eigenvalues(DenseMatrix A);

}  // namespace itereig
