#include "itereig/eigenbasis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace itereig {

EigenBasis::EigenBasis(std::vector<Complex> eigenvalues, DenseMatrix Z,
                       const std::function<Vector(const Vector&)>& apply_A, double a_frob,
                       Complex sigma)
{
    n_ = Z.nrows;
    if (Z.ncols != n_ || eigenvalues.size() != n_ || n_ == 0)
        throw std::invalid_argument("EigenBasis: inconsistent dimensions");

    // normalize columns
    for (std::size_t j = 0; j < n_; ++j) {
        auto c = Z.col(j);
        const double nrm = norm2(c);
        if (nrm == 0.0)
            throw NumericalError("EigenBasis: zero eigenvector column " + std::to_string(j));
        scale(c, 1.0 / nrm);
    }

    // order the target (min |gamma - sigma|) first, keeping the rest stable
    std::size_t target = 0;
    double best = std::abs(eigenvalues[0] - sigma);
    for (std::size_t j = 1; j < n_; ++j) {
        const double d = std::abs(eigenvalues[j] - sigma);
        if (d < best) {
            best = d;
            target = j;
        }
    }
    if (target != 0) {
        const Complex ev = eigenvalues[target];
        Vector zc(Z.col(target).begin(), Z.col(target).end());
        for (std::size_t j = target; j > 0; --j) {
            eigenvalues[j] = eigenvalues[j - 1];
            std::copy(Z.col(j - 1).begin(), Z.col(j - 1).end(), Z.col(j).begin());
        }
        eigenvalues[0] = ev;
        std::copy(zc.begin(), zc.end(), Z.col(0).begin());
    }

    // residual validation
    const double rtol = 1e-10 * std::max(a_frob, 1e-300);
    for (std::size_t j = 0; j < n_; ++j) {
        Vector zj(Z.col(j).begin(), Z.col(j).end());
        Vector az = apply_A(zj);
        axpy(-eigenvalues[j], zj, az);
        if (norm2(az) > rtol)
            throw NumericalError("EigenBasis: eigenpair residual too large in column " +
                                 std::to_string(j) + " (" + std::to_string(norm2(az)) + ")");
    }

    eigenvalues_ = std::move(eigenvalues);
    Z_ = std::move(Z);
    Zlu_ = std::make_shared<LuFactor>(Z_);

    // round-trip check Z^{-1}(Z v) = v on a deterministic random probe
    {
        std::mt19937 rng(12345);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Vector v(n_);
        for (Complex& x : v)
            x = Complex(u(rng), u(rng));
        Vector zv = matvec(Z_, v);
        Vector back = Zlu_->solve(zv);
        axpy(-1.0, v, std::span<Complex>(back));
        if (norm2(back) > 1e-10 * norm2(v))
            throw NumericalError("EigenBasis: Z is too ill-conditioned for inverse application");
    }

    z_norm2_ = spectral_norm2(Z_);
    const double zinv_norm = spectral_norm2(
                                 n_, [&](const Vector& v) { return Zlu_->solve(v); },
                                 [&](const Vector& v) { return Zlu_->solve_adjoint(v); })
                                 .value;
    z_cond2_ = z_norm2_ * zinv_norm;
}

Vector EigenBasis::apply_zinv(std::span<const Complex> v) const
{
    return Zlu_->solve(v);
}

EigenBasis EigenBasis::retarget(Complex sigma) const
{
    EigenBasis out;
    out.n_ = n_;
    out.eigenvalues_ = eigenvalues_;
    out.Z_ = Z_;
    std::size_t target = 0;
    double best = std::abs(eigenvalues_[0] - sigma);
    for (std::size_t j = 1; j < n_; ++j) {
        const double d = std::abs(eigenvalues_[j] - sigma);
        if (d < best) {
            best = d;
            target = j;
        }
    }
    if (target != 0) {
        const Complex ev = out.eigenvalues_[target];
        Vector zc(out.Z_.col(target).begin(), out.Z_.col(target).end());
        for (std::size_t j = target; j > 0; --j) {
            out.eigenvalues_[j] = out.eigenvalues_[j - 1];
            std::copy(out.Z_.col(j - 1).begin(), out.Z_.col(j - 1).end(), out.Z_.col(j).begin());
        }
        out.eigenvalues_[0] = ev;
        std::copy(zc.begin(), zc.end(), out.Z_.col(0).begin());
        out.Zlu_ = std::make_shared<LuFactor>(out.Z_);
    } else {
        out.Zlu_ = Zlu_;
    }
    out.z_norm2_ = z_norm2_;
    out.z_cond2_ = z_cond2_;
    return out;
}

EigenBasis EigenBasis::shifted(Complex sigma) const
{
    EigenBasis out = retarget(sigma);
    for (Complex& ev : out.eigenvalues_)
        ev -= sigma;
    return out;
}

ConvDiffProblem gen_convdiff(std::size_t m, double alpha_x, double beta_x, double gamma_x,
                             double alpha_y, double beta_y, double gamma_y, Complex sigma)
{
    if (m < 2)
        throw std::invalid_argument("gen_convdiff: m must be >= 2");
    if (beta_x * gamma_x <= 0.0 || beta_y * gamma_y <= 0.0)
        throw std::invalid_argument(
            "gen_convdiff: beta*gamma must be positive on both axes (real-eigenvalue regime)");

    const std::size_t n = m * m;
    // A = T_x kron I + I kron T_y, lexicographic vec ordering: index p*m + q.
    std::vector<Triplet> t;
    t.reserve(5 * n);
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q) {
            const std::size_t i = p * m + q;
            t.push_back({i, i, alpha_x + alpha_y});
            if (p > 0)
                t.push_back({i, i - m, beta_x});
            if (p + 1 < m)
                t.push_back({i, i + m, gamma_x});
            if (q > 0)
                t.push_back({i, i - 1, beta_y});
            if (q + 1 < m)
                t.push_back({i, i + 1, gamma_y});
        }
    SparseMatrix A = sparse_from_triplets(n, n, std::move(t));

    const double pi = std::numbers::pi;
    auto axis = [&](double alpha, double beta, double gamma, std::size_t p, Vector& vec) {
        // Eigenpair p (1-based) of tridiag(beta, alpha, gamma): diagonal
        // scaling symmetrizes the off-diagonals to sign(gamma)*sqrt(beta*gamma),
        // so lambda = alpha + 2 sign(gamma) sqrt(beta gamma) cos(p pi/(m+1))
        // with v_j = (beta/gamma)^{j/2} sin(j p pi/(m+1)).
        const double s = (gamma < 0 ? -1.0 : 1.0) * std::sqrt(beta * gamma);
        const double ratio = std::sqrt(beta / gamma);
        vec.assign(m, 0.0);
        double scalefac = 1.0;
        for (std::size_t j = 1; j <= m; ++j) {
            scalefac *= ratio;
            vec[j - 1] = scalefac * std::sin(static_cast<double>(j * p) * pi / (m + 1));
        }
        return alpha + 2.0 * s * std::cos(static_cast<double>(p) * pi / (m + 1));
    };

    std::vector<Complex> evals(n);
    DenseMatrix Z(n, n);
    Vector vx, vy;
    std::size_t col = 0;
    for (std::size_t p = 1; p <= m; ++p) {
        const double lx = axis(alpha_x, beta_x, gamma_x, p, vx);
        for (std::size_t q = 1; q <= m; ++q, ++col) {
            const double ly = axis(alpha_y, beta_y, gamma_y, q, vy);
            evals[col] = lx + ly;
            auto zc = Z.col(col);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    zc[i * m + j] = vx[i] * vy[j];
        }
    }

    const double a_frob = sparse_frobenius_norm(A);
    EigenBasis basis(std::move(evals), std::move(Z),
                     [&](const Vector& v) { return spmv(A, v); }, a_frob, sigma);
    return {std::move(A), std::move(basis)};
}

EigenBasis eigb_read(const std::string& path, const std::function<Vector(const Vector&)>& apply_A,
                     double a_frob, Complex sigma)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open eigenbasis file: " + path);
    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != "EIGB1" || n == 0)
        throw ParseError(path + ": missing EIGB1 header");
    std::vector<Complex> evals(n);
    for (std::size_t j = 0; j < n; ++j) {
        double re, im;
        if (!(in >> re >> im))
            throw ParseError(path + ": truncated eigenvalue list");
        evals[j] = Complex(re, im);
    }
    DenseMatrix Z(n, n);
    for (std::size_t k = 0; k < n * n; ++k) {
        double re, im;
        if (!(in >> re >> im))
            throw ParseError(path + ": truncated eigenvector data");
        Z.data[k] = Complex(re, im);
    }
    return EigenBasis(std::move(evals), std::move(Z), apply_A, a_frob, sigma);
}

void eigb_write(const std::vector<Complex>& eigenvalues, const DenseMatrix& Z,
                const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open output file: " + path);
    const std::size_t n = Z.nrows;
    out << "EIGB1 " << n << "\n";
    char buf[80];
    for (const Complex& ev : eigenvalues) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", ev.real(), ev.imag());
        out << buf;
    }
    for (const Complex& v : Z.data) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.real(), v.imag());
        out << buf;
    }
}

}  // namespace itereig
