#pragma once

#include <memory>

#include "itereig/dense.hpp"
#include "itereig/sparse.hpp"
#include "itereig/types.hpp"

namespace itereig {

// Eigenvector basis of a diagonalizable matrix, target eigenvalue first.
// Immutable after construction; safe to share across threads.
class EigenBasis {
  public:
    // Validates A z_j = lambda_j z_j against the supplied operator, normalizes
    // the columns of Z, orders the eigenvalue closest to `sigma` first and
    // factors Z for inverse applications. `a_frob` scales the residual check.
    EigenBasis(std::vector<Complex> eigenvalues, DenseMatrix Z,
               const std::function<Vector(const Vector&)>& apply_A, double a_frob,
               Complex sigma = 0.0);

    std::size_t dim() const { return n_; }
    const std::vector<Complex>& eigenvalues() const { return eigenvalues_; }
    const DenseMatrix& Z() const { return Z_; }
    double z_norm2() const { return z_norm2_; }
    double z_cond2() const { return z_cond2_; }

    Vector apply_zinv(std::span<const Complex> v) const;

    // Same basis with the eigenvalue closest to `sigma` moved to the front.
    EigenBasis retarget(Complex sigma) const;

    // Basis of the shifted operator B = A - sigma*I: eigenvalues become
    // lambda_j = gamma_j - sigma with the smallest-magnitude one first.
    // Eigenvectors, factorization and norms carry over unchanged.
    EigenBasis shifted(Complex sigma) const;

  private:
    EigenBasis() = default;

    std::size_t n_ = 0;
    std::vector<Complex> eigenvalues_;
    DenseMatrix Z_;
    std::shared_ptr<const LuFactor> Zlu_;
    double z_norm2_ = 0;
    double z_cond2_ = 0;
};

struct ConvDiffProblem {
    SparseMatrix A;
    EigenBasis basis;
};

// 2-D convection-diffusion analogue: A = T_x kron I + I kron T_y with each T a
// Toeplitz tridiagonal (sub/diag/super = beta/alpha/gamma). Requires
// beta*gamma > 0 on both axes so the analytic eigenbasis is real.
ConvDiffProblem gen_convdiff(std::size_t m, double alpha_x, double beta_x, double gamma_x,
                             double alpha_y, double beta_y, double gamma_y,
                             Complex sigma = 0.0);

// EIGB1 sidecar format: "EIGB1 n", n eigenvalue lines "re im", then n*n
// column-major entries of Z as "re im" lines.
EigenBasis eigb_read(const std::string& path, const std::function<Vector(const Vector&)>& apply_A,
                     double a_frob, Complex sigma);
void eigb_write(const std::vector<Complex>& eigenvalues, const DenseMatrix& Z,
                const std::string& path);

}  // namespace itereig
