#include "itereig/sparse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace itereig {

SparseMatrix sparse_from_triplets(std::size_t nrows, std::size_t ncols,
                                  std::vector<Triplet> entries)
{
    for (const Triplet& t : entries)
        if (t.row >= nrows || t.col >= ncols)
            throw std::invalid_argument("sparse_from_triplets: index out of range");
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseMatrix A;
    A.nrows = nrows;
    A.ncols = ncols;
    A.row_offsets.assign(nrows + 1, 0);
    for (std::size_t k = 0; k < entries.size();) {
        std::size_t j = k + 1;
        Complex sum = entries[k].value;
        while (j < entries.size() && entries[j].row == entries[k].row &&
               entries[j].col == entries[k].col) {
            sum += entries[j].value;
            ++j;
        }
        A.col_indices.push_back(entries[k].col);
        A.values.push_back(sum);
        ++A.row_offsets[entries[k].row + 1];
        k = j;
    }
    for (std::size_t i = 0; i < nrows; ++i)
        A.row_offsets[i + 1] += A.row_offsets[i];
    return A;
}

Vector spmv(const SparseMatrix& A, std::span<const Complex> x)
{
    if (x.size() != A.ncols)
        throw std::invalid_argument("spmv: dimension mismatch");
    Vector y(A.nrows, 0.0);
    for (std::size_t i = 0; i < A.nrows; ++i) {
        Complex s = 0.0;
        for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
            s += A.values[k] * x[A.col_indices[k]];
        y[i] = s;
    }
    return y;
}

SparseMatrix sparse_add(const SparseMatrix& A, Complex alpha, const SparseMatrix& B)
{
    if (A.nrows != B.nrows || A.ncols != B.ncols)
        throw std::invalid_argument("sparse_add: dimension mismatch");
    std::vector<Triplet> t;
    t.reserve(A.nnz() + B.nnz());
    for (std::size_t i = 0; i < A.nrows; ++i) {
        for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
            t.push_back({i, A.col_indices[k], A.values[k]});
        for (std::size_t k = B.row_offsets[i]; k < B.row_offsets[i + 1]; ++k)
            t.push_back({i, B.col_indices[k], alpha * B.values[k]});
    }
    return sparse_from_triplets(A.nrows, A.ncols, std::move(t));
}

SparseMatrix sparse_identity(std::size_t n)
{
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        t.push_back({i, i, 1.0});
    return sparse_from_triplets(n, n, std::move(t));
}

double sparse_frobenius_norm(const SparseMatrix& A)
{
    return norm2(A.values);
}

std::vector<double> sparse_row_norms(const SparseMatrix& A)
{
    std::vector<double> r(A.nrows, 0.0);
    for (std::size_t i = 0; i < A.nrows; ++i) {
        double s = 0.0;
        for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
            s += std::norm(A.values[k]);
        r[i] = std::sqrt(s);
    }
    return r;
}

namespace {

std::string lower(std::string s)
{
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

double parse_double(const std::string& tok, const std::string& ctx)
{
    // locale-independent: strtod with classic "C" semantics is assumed; the
    // harness never sets a numeric locale.
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw ParseError(ctx + ": bad numeric token '" + tok + "'");
    return v;
}

}  // namespace

SparseMatrix mm_read(std::istream& in, const std::string& name)
{
    std::string header;
    if (!std::getline(in, header))
        throw ParseError(name + ": empty file");
    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket")
        throw ParseError(name + ": missing %%MatrixMarket banner");
    if (lower(object) != "matrix" || lower(format) != "coordinate")
        throw ParseError(name + ": only 'matrix coordinate' files are supported");
    field = lower(field);
    symmetry = lower(symmetry);
    if (field != "real" && field != "integer")
        throw ParseError(name + ": unsupported field '" + field +
                         "' (only real/integer)");
    if (symmetry != "general" && symmetry != "symmetric")
        throw ParseError(name + ": unsupported symmetry '" + symmetry +
                         "' (only general/symmetric)");

    std::string line;
    std::size_t nrows = 0, ncols = 0, nnz = 0;
    bool have_sizes = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '%')
            continue;
        std::istringstream ls(line);
        if (!(ls >> nrows >> ncols >> nnz))
            continue;  // tolerate blank lines before the size line
        have_sizes = true;
        break;
    }
    if (!have_sizes)
        throw ParseError(name + ": missing size line");

    std::vector<Triplet> t;
    t.reserve(symmetry == "symmetric" ? 2 * nnz : nnz);
    std::size_t seen = 0;
    while (seen < nnz && std::getline(in, line)) {
        if (line.empty() || line[0] == '%')
            continue;
        std::istringstream ls(line);
        std::size_t r, c;
        std::string vtok;
        if (!(ls >> r >> c >> vtok))
            throw ParseError(name + ": malformed entry line '" + line + "'");
        if (r < 1 || r > nrows || c < 1 || c > ncols)
            throw ParseError(name + ": entry index out of range in line '" + line + "'");
        const double v = parse_double(vtok, name);
        t.push_back({r - 1, c - 1, v});
        if (symmetry == "symmetric" && r != c)
            t.push_back({c - 1, r - 1, v});
        ++seen;
    }
    if (seen != nnz)
        throw ParseError(name + ": expected " + std::to_string(nnz) + " entries, got " +
                         std::to_string(seen));
    return sparse_from_triplets(nrows, ncols, std::move(t));
}

SparseMatrix mm_read(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open matrix file: " + path);
    return mm_read(in, path);
}

void mm_write(const SparseMatrix& A, std::ostream& out)
{
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.nrows << " " << A.ncols << " " << A.nnz() << "\n";
    char buf[64];
    for (std::size_t i = 0; i < A.nrows; ++i)
        for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", i + 1,
                          A.col_indices[k] + 1, A.values[k].real());
            out << buf;
        }
}

void mm_write(const SparseMatrix& A, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open output file: " + path);
    mm_write(A, out);
}

SparseMatrix gen_tridiag(std::size_t n, double a, double b, double c)
{
    if (n < 1)
        throw std::invalid_argument("gen_tridiag: n must be >= 1");
    std::vector<Triplet> t;
    t.reserve(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0)
            t.push_back({i, i - 1, a});
        t.push_back({i, i, b});
        if (i + 1 < n)
            t.push_back({i, i + 1, c});
    }
    return sparse_from_triplets(n, n, std::move(t));
}

}  // namespace itereig
