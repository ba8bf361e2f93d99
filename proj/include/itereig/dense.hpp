#pragma once

#include <functional>

#include "itereig/types.hpp"

namespace itereig {

// Column-major dense complex matrix.
struct DenseMatrix {
    std::size_t nrows = 0;
    std::size_t ncols = 0;
    std::vector<Complex> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : nrows(r), ncols(c), data(r * c, 0.0) {}

    Complex& operator()(std::size_t i, std::size_t j) { return data[i + j * nrows]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data[i + j * nrows]; }

    std::span<Complex> col(std::size_t j) { return {data.data() + j * nrows, nrows}; }
    std::span<const Complex> col(std::size_t j) const { return {data.data() + j * nrows, nrows}; }

    static DenseMatrix identity(std::size_t n)
    {
        DenseMatrix I(n, n);
        for (std::size_t i = 0; i < n; ++i)
            I(i, i) = 1.0;
        return I;
    }

    double frobenius_norm() const
    {
        return norm2(data);
    }
};

Vector matvec(const DenseMatrix& A, std::span<const Complex> x);
// y = A^H x
Vector matvec_adjoint(const DenseMatrix& A, std::span<const Complex> x);
DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B);

// Partial-pivoted LU of a square matrix; solves keep the factorization.
class LuFactor {
  public:
    explicit LuFactor(DenseMatrix A);

    Vector solve(std::span<const Complex> rhs) const;
    Vector solve_adjoint(std::span<const Complex> rhs) const;
    std::size_t dim() const { return lu_.nrows; }

  private:
    DenseMatrix lu_;
    std::vector<std::size_t> piv_;
};

// Convenience wrapper: factor once, solve once.
Vector dense_lu_solve(const DenseMatrix& Z, std::span<const Complex> v);

struct LeastSquaresSolution {
    Vector x;             // minimum-norm minimizer
    double residual = 0;  // 2-norm of b - A x
    std::size_t rank = 0;
};

// Minimum-norm least squares via column-pivoted Householder QR followed by a
// complete orthogonal factorization of the rank-deficient leading block.
LeastSquaresSolution least_squares(const DenseMatrix& A, std::span<const Complex> b);

struct LeastSquaresResult {
    Vector coefficients;
    double min_value = 0;
};

// min over c of || d + M c ||_2 with q(lambda) = 1 + sum c_m lambda^m folded
// into the columns of M by the caller. k = 0 returns ||d||_2.
LeastSquaresResult constrained_poly_ls(const Vector& d, const DenseMatrix& M);

struct SpectralNormEstimate {
    double value = 0;
    bool converged = true;
};

// Largest singular value by power iteration on the normal operator.
// apply/apply_adjoint realize Z v and Z^H v for an n-column operator.
SpectralNormEstimate spectral_norm2(std::size_t ncols,
                                    const std::function<Vector(const Vector&)>& apply,
                                    const std::function<Vector(const Vector&)>& apply_adjoint);

double spectral_norm2(const DenseMatrix& Z);

}  // namespace itereig
