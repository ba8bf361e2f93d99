#pragma once

#include <iosfwd>

#include "itereig/types.hpp"

namespace itereig {

// Compressed sparse row matrix. Column indices are strictly increasing within
// each row; duplicates are merged at construction.
struct SparseMatrix {
    std::size_t nrows = 0;
    std::size_t ncols = 0;
    std::vector<std::size_t> row_offsets;  // length nrows + 1
    std::vector<std::size_t> col_indices;
    std::vector<Complex> values;

    std::size_t nnz() const { return values.size(); }
};

struct Triplet {
    std::size_t row;
    std::size_t col;
    Complex value;
};

// Sorts, sums duplicates, drops nothing else.
SparseMatrix sparse_from_triplets(std::size_t nrows, std::size_t ncols,
                                  std::vector<Triplet> entries);

Vector spmv(const SparseMatrix& A, std::span<const Complex> x);

// C = A + alpha * B (matching dimensions).
SparseMatrix sparse_add(const SparseMatrix& A, Complex alpha, const SparseMatrix& B);

SparseMatrix sparse_identity(std::size_t n);

double sparse_frobenius_norm(const SparseMatrix& A);

// 2-norms of each row, used as the ILU drop reference.
std::vector<double> sparse_row_norms(const SparseMatrix& A);

// Matrix Market coordinate format, field real or integer, symmetry general or
// symmetric. Symmetric storage is expanded; duplicate entries are summed.
SparseMatrix mm_read(const std::string& path);
SparseMatrix mm_read(std::istream& in, const std::string& name);
void mm_write(const SparseMatrix& A, const std::string& path);
void mm_write(const SparseMatrix& A, std::ostream& out);

// Toeplitz tridiagonal with sub/diag/super = a/b/c.
SparseMatrix gen_tridiag(std::size_t n, double a, double b, double c);

}  // namespace itereig
