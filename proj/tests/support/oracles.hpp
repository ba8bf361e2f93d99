#pragma once

#include <random>

#include "itereig/dense.hpp"
#include "itereig/krylov.hpp"
#include "itereig/sparse.hpp"
#include "itereig/types.hpp"

// Independent reference implementations used only by the test suites.
namespace oracles {

using itereig::Complex;
using itereig::DenseMatrix;
using itereig::LinearOp;
using itereig::Vector;

struct EigPairs {
    std::vector<Complex> eigenvalues;
    DenseMatrix Z;  // unit-norm eigenvector columns
};

// Full dense eigendecomposition by Householder Hessenberg reduction, complex
// Schur iteration with accumulation, and triangular back-substitution for the
// eigenvectors. Self-contained; shares no code with the library eigensolver.
EigPairs eig_dense(const DenseMatrix& A);

// Residual of the best approximation to rhs from the span of
// {Op rhs, Op^2 rhs, ..., Op^k rhs} with Op = B P^{-1}: the exact value GMRES
// must attain at step k, computed by explicit basis assembly.
double krylov_ls_residual(const LinearOp& apply_B, const LinearOp& apply_Pinv, const Vector& rhs,
                          std::size_t k);

// Largest principal angle (radians) between the column spans of X and Y.
double largest_principal_angle(const DenseMatrix& X, const DenseMatrix& Y);

// Random test operator A = Z diag(lambda) Z^{-1} with a controlled basis.
struct SyntheticProblem {
    std::vector<Complex> eigenvalues;
    DenseMatrix Z;
    DenseMatrix A;
};
SyntheticProblem random_diagonalizable(std::mt19937& rng, std::size_t n, bool complex_spectrum);

DenseMatrix dense_from_sparse(const itereig::SparseMatrix& A);

}  // namespace oracles
