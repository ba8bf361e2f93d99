#include "itereig/dense.hpp"

#include "itereig/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace itereig {

Vector matvec(const DenseMatrix& A, std::span<const Complex> x)
{
    if (x.size() != A.ncols)
        throw std::invalid_argument("matvec: dimension mismatch");
    Vector y(A.nrows, 0.0);
    for (std::size_t j = 0; j < A.ncols; ++j) {
        const Complex xj = x[j];
        if (xj == 0.0)
            continue;
        auto c = A.col(j);
        for (std::size_t i = 0; i < A.nrows; ++i)
            y[i] += c[i] * xj;
    }
    return y;
}

Vector matvec_adjoint(const DenseMatrix& A, std::span<const Complex> x)
{
    if (x.size() != A.nrows)
        throw std::invalid_argument("matvec_adjoint: dimension mismatch");
    Vector y(A.ncols, 0.0);
    for (std::size_t j = 0; j < A.ncols; ++j)
        y[j] = dot(A.col(j), x);
    return y;
}

DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B)
{
    if (A.ncols != B.nrows)
        throw std::invalid_argument("matmul: dimension mismatch");
    DenseMatrix C(A.nrows, B.ncols);
    for (std::size_t j = 0; j < B.ncols; ++j) {
        Vector cj = matvec(A, B.col(j));
        std::copy(cj.begin(), cj.end(), C.col(j).begin());
    }
    return C;
}

LuFactor::LuFactor(DenseMatrix A) : lu_(std::move(A))
{
    if (lu_.nrows != lu_.ncols)
        throw std::invalid_argument("LuFactor: matrix must be square");
    const std::size_t n = lu_.nrows;
    piv_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double a = std::abs(lu_(i, k));
            if (a > best) {
                best = a;
                p = i;
            }
        }
        if (best == 0.0)
            throw NumericalError("LuFactor: singular matrix (zero pivot in column " +
                                 std::to_string(k) + ")");
        piv_[k] = p;
        if (p != k)
            for (std::size_t j = 0; j < n; ++j)
                std::swap(lu_(k, j), lu_(p, j));
        const Complex pivot = lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex m = lu_(i, k) / pivot;
            lu_(i, k) = m;
            if (m == 0.0)
                continue;
            for (std::size_t j = k + 1; j < n; ++j)
                lu_(i, j) -= m * lu_(k, j);
        }
    }
}

Vector LuFactor::solve(std::span<const Complex> rhs) const
{
    const std::size_t n = dim();
    if (rhs.size() != n)
        throw std::invalid_argument("LuFactor::solve: dimension mismatch");
    Vector x(rhs.begin(), rhs.end());
    for (std::size_t k = 0; k < n; ++k)
        if (piv_[k] != k)
            std::swap(x[k], x[piv_[k]]);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = k + 1; i < n; ++i)
            x[i] -= lu_(i, k) * x[k];
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t j = k + 1; j < n; ++j)
            x[k] -= lu_(k, j) * x[j];
        x[k] /= lu_(k, k);
    }
    return x;
}

Vector LuFactor::solve_adjoint(std::span<const Complex> rhs) const
{
    // Solves A^H x = rhs using (PA = LU) => A^H = U^H L^H P.
    const std::size_t n = dim();
    if (rhs.size() != n)
        throw std::invalid_argument("LuFactor::solve_adjoint: dimension mismatch");
    Vector x(rhs.begin(), rhs.end());
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < k; ++j)
            x[k] -= std::conj(lu_(j, k)) * x[j];
        x[k] /= std::conj(lu_(k, k));
    }
    for (std::size_t k = n; k-- > 0;)
        for (std::size_t i = k + 1; i < n; ++i)
            x[k] -= std::conj(lu_(i, k)) * x[i];
    for (std::size_t k = n; k-- > 0;)
        if (piv_[k] != k)
            std::swap(x[k], x[piv_[k]]);
    return x;
}

Vector dense_lu_solve(const DenseMatrix& Z, std::span<const Complex> v)
{
    return LuFactor(Z).solve(v);
}

namespace {

// In-place Householder reflector for column segment x[0..len); returns beta
// such that H x = (-sign)*||x|| e1 with H = I - beta v v^H, v stored in x with
// v[0] = 1 implicit. Returns the resulting diagonal value through `diag`.
struct Reflector {
    Vector v;
    Complex beta = 0.0;
};

Reflector make_reflector(std::span<Complex> x, Complex& diag)
{
    Reflector h;
    h.v.assign(x.begin(), x.end());
    const double xnorm = norm2(x);
    if (xnorm == 0.0) {
        diag = 0.0;
        h.beta = 0.0;
        return h;
    }
    Complex alpha = x[0];
    const double aabs = std::abs(alpha);
    const Complex phase = (aabs == 0.0) ? Complex(1.0, 0.0) : alpha / aabs;
    const Complex r = -phase * xnorm;
    h.v[0] = alpha - r;
    const double vnorm2 = norm2(h.v) * norm2(h.v);
    h.beta = (vnorm2 == 0.0) ? Complex(0.0) : Complex(2.0) / vnorm2;
    diag = r;
    return h;
}

void apply_reflector(const Reflector& h, std::span<Complex> x)
{
    if (h.beta == 0.0)
        return;
    const Complex s = h.beta * dot(h.v, x);
    axpy(-s, h.v, x);
}

}  // namespace

LeastSquaresSolution least_squares(const DenseMatrix& A, std::span<const Complex> b)
{
    const std::size_t m = A.nrows;
    const std::size_t n = A.ncols;
    if (b.size() != m)
        throw std::invalid_argument("least_squares: dimension mismatch");

    LeastSquaresSolution out;
    if (n == 0) {
        out.residual = norm2(b);
        return out;
    }

    DenseMatrix R = A;
    Vector qtb(b.begin(), b.end());
    std::vector<std::size_t> perm(n);
    for (std::size_t j = 0; j < n; ++j)
        perm[j] = j;

    std::vector<double> colnorm(n);
    for (std::size_t j = 0; j < n; ++j)
        colnorm[j] = norm2(R.col(j));
    const double tol = 1e-13 * *std::max_element(colnorm.begin(), colnorm.end());

    const std::size_t kmax = std::min(m, n);
    std::size_t rank = 0;
    for (std::size_t k = 0; k < kmax; ++k) {
        // column pivot: largest remaining trailing norm
        std::size_t p = k;
        double best = -1.0;
        for (std::size_t j = k; j < n; ++j) {
            Vector tail(R.col(j).begin() + k, R.col(j).end());
            const double nrm = norm2(tail);
            if (nrm > best) {
                best = nrm;
                p = j;
            }
        }
        if (best <= tol)
            break;
        if (p != k) {
            for (std::size_t i = 0; i < m; ++i)
                std::swap(R(i, k), R(i, p));
            std::swap(perm[k], perm[p]);
        }
        Complex diag;
        auto colk = R.col(k);
        Reflector h = make_reflector(colk.subspan(k), diag);
        R(k, k) = diag;
        for (std::size_t i = k + 1; i < m; ++i)
            R(i, k) = 0.0;
        for (std::size_t j = k + 1; j < n; ++j)
            apply_reflector(h, R.col(j).subspan(k));
        apply_reflector(h, std::span<Complex>(qtb).subspan(k));
        ++rank;
    }
    out.rank = rank;

    {
        Vector tail(qtb.begin() + rank, qtb.end());
        out.residual = norm2(tail);
    }

    Vector y(n, 0.0);
    if (rank == n || rank == 0) {
        // full column rank (or zero): plain back substitution
        for (std::size_t k = rank; k-- > 0;) {
            Complex s = qtb[k];
            for (std::size_t j = k + 1; j < rank; ++j)
                s -= R(k, j) * y[j];
            y[k] = s / R(k, k);
        }
    } else {
        // Complete orthogonal factorization: LQ of the rank x n block
        // [R11 R12], via Householder QR of its adjoint.
        DenseMatrix T(n, rank);
        for (std::size_t i = 0; i < rank; ++i)
            for (std::size_t j = 0; j < n; ++j)
                T(j, i) = std::conj(R(i, j));
        std::vector<Reflector> refl;
        refl.reserve(rank);
        for (std::size_t k = 0; k < rank; ++k) {
            Complex diag;
            auto colk = T.col(k);
            Reflector h = make_reflector(colk.subspan(k), diag);
            T(k, k) = diag;
            for (std::size_t i = k + 1; i < n; ++i)
                T(i, k) = 0.0;
            for (std::size_t j = k + 1; j < rank; ++j)
                apply_reflector(h, T.col(j).subspan(k));
            refl.push_back(std::move(h));
        }
        // [R11 R12]^H = Q_t T  =>  [R11 R12] = T^H Q_t^H;  L = T^H (lower tri).
        // Solve L u = qtb[0..rank), then y = Q_t [u; 0].
        Vector u(rank, 0.0);
        for (std::size_t k = 0; k < rank; ++k) {
            Complex s = qtb[k];
            for (std::size_t j = 0; j < k; ++j)
                s -= std::conj(T(j, k)) * u[j];
            u[k] = s / std::conj(T(k, k));
        }
        Vector w(n, 0.0);
        std::copy(u.begin(), u.end(), w.begin());
        for (std::size_t k = rank; k-- > 0;)
            apply_reflector(refl[k], std::span<Complex>(w).subspan(k));
        y = std::move(w);
    }

    out.x.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        out.x[perm[j]] = y[j];
    return out;
}

LeastSquaresResult constrained_poly_ls(const Vector& d, const DenseMatrix& M)
{
    if (d.empty())
        throw std::invalid_argument("constrained_poly_ls: empty data vector");
    if (M.ncols > 0 && M.nrows != d.size())
        throw std::invalid_argument("constrained_poly_ls: dimension mismatch");
    LeastSquaresResult res;
    if (M.ncols == 0) {
        res.min_value = norm2(d);
        return res;
    }
    Vector negd = scaled(d, -1.0);
    LeastSquaresSolution ls = least_squares(M, negd);
    res.coefficients = std::move(ls.x);
    res.min_value = ls.residual;
    return res;
}

SpectralNormEstimate spectral_norm2(std::size_t ncols,
                                    const std::function<Vector(const Vector&)>& apply,
                                    const std::function<Vector(const Vector&)>& apply_adjoint)
{
    if (ncols == 0)
        throw std::invalid_argument("spectral_norm2: empty operator");
    const std::size_t max_it = 5000;
    const double tol = 1e-8;
    Vector v(ncols, 1.0 / std::sqrt(static_cast<double>(ncols)));
    double sigma = 0.0;
    SpectralNormEstimate est;
    for (std::size_t it = 0; it < max_it; ++it) {
        Vector av = apply(v);
        Vector w = apply_adjoint(av);
        const double wn = norm2(w);
        const double s = norm2(av);  // ||Zv|| with ||v|| = 1 estimates sigma_max
        if (wn == 0.0) {
            est.value = 0.0;
            return est;
        }
        scale(w, 1.0 / wn);
        v = std::move(w);
        if (it > 0 && std::abs(s - sigma) <= tol * std::max(s, 1e-300)) {
            est.value = s;
            return est;
        }
        sigma = s;
    }
    est.value = sigma;
    est.converged = false;
    return est;
}

namespace {

// Largest eigenvalue of a real symmetric tridiagonal matrix by implicit-shift
// QL sweeps (eigenvalues only). Globally convergent, unlike shifted QR on a
// general Hessenberg form, which can cycle on tight clusters.
double tridiag_lmax(std::vector<double> d, std::vector<double> e)
{
    const std::size_t n = d.size();
    if (n == 1)
        return d[0];
    e.push_back(0.0);
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        std::size_t iter = 0;
        while (true) {
            std::size_t m = l;
            while (m + 1 < n && std::abs(e[m]) > eps * (std::abs(d[m]) + std::abs(d[m + 1])))
                ++m;
            if (m == l)
                break;
            if (++iter > 100)
                throw NumericalError("tridiag_lmax: QL iteration failed to converge");
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool underflow = false;
            for (std::size_t i = m; i-- > l;) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if (underflow)
                continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    return *std::max_element(d.begin(), d.end());
}

}  // namespace

double spectral_norm2(const DenseMatrix& Z)
{
    // Power iteration can stall or lock onto a subdominant direction when the
    // top singular values cluster or the start vector is deficient, so with
    // the explicit matrix available take the largest Gram eigenvalue instead.
    const std::size_t n = Z.ncols;
    DenseMatrix G(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            G(i, j) = dot(Z.col(i), Z.col(j));

    // Householder reduction of the Hermitian Gram matrix to tridiagonal form;
    // a diagonal phase similarity makes the off-diagonals real, so only their
    // magnitudes matter.
    for (std::size_t k = 0; k + 2 < n; ++k) {
        Vector v(n - k - 1);
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = G(k + 1 + i, k);
        const double xnorm = norm2(v);
        if (xnorm == 0.0)
            continue;
        const Complex alpha = v[0];
        const double aabs = std::abs(alpha);
        const Complex phase = (aabs == 0.0) ? Complex(1.0) : alpha / aabs;
        v[0] = alpha + phase * xnorm;
        const double vn = norm2(v);
        if (vn == 0.0)
            continue;
        const Complex beta = Complex(2.0) / (vn * vn);
        for (std::size_t j = k; j < n; ++j) {
            Complex s = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i)
                s += std::conj(v[i]) * G(k + 1 + i, j);
            s *= beta;
            for (std::size_t i = 0; i < v.size(); ++i)
                G(k + 1 + i, j) -= s * v[i];
        }
        for (std::size_t i = k; i < n; ++i) {
            Complex s = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j)
                s += G(i, k + 1 + j) * v[j];
            s *= beta;
            for (std::size_t j = 0; j < v.size(); ++j)
                G(i, k + 1 + j) -= s * std::conj(v[j]);
        }
    }
    std::vector<double> d(n), e(n > 1 ? n - 1 : 0);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = G(i, i).real();
    for (std::size_t i = 0; i + 1 < n; ++i)
        e[i] = std::abs(G(i + 1, i));
    return std::sqrt(std::max(tridiag_lmax(std::move(d), std::move(e)), 0.0));
}

}  // namespace itereig
