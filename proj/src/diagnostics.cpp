#include "itereig/diagnostics.hpp"

#include "itereig/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace itereig {

WeightRecord compute_weights(const EigenBasis& basis, const Vector& y, const SparseMatrix* M)
{
    if (y.size() != basis.dim())
        throw std::invalid_argument("compute_weights: dimension mismatch");
    const double ynorm = norm2(y);
    if (ynorm == 0.0)
        throw std::invalid_argument("compute_weights: zero vector");
    const std::vector<Complex>& lam = basis.eigenvalues();
    if (lam[0] == 0.0)
        throw NumericalError("compute_weights: shift coincides with an eigenvalue");

    WeightRecord rec;
    rec.w = basis.apply_zinv(y);
    scale(rec.w, 1.0 / ynorm);
    rec.w1 = rec.w[0];
    rec.w2_norm = norm2(std::span<const Complex>(rec.w).subspan(1));
    rec.wt.resize(basis.dim() - 1);
    for (std::size_t j = 1; j < basis.dim(); ++j)
        rec.wt[j - 1] = rec.w[j] * (1.0 - lam[j] / lam[0]);
    rec.wt_norm = norm2(rec.wt);

    if (M) {
        Vector my = spmv(*M, y);
        Vector f = basis.apply_zinv(my);
        double ftn = 0.0;
        for (std::size_t j = 1; j < basis.dim(); ++j)
            ftn += std::norm(f[j] * (1.0 - lam[j] / lam[0]));
        rec.ft_norm = std::sqrt(ftn);
        rec.f = std::move(f);
    }
    return rec;
}

namespace {

// Minimum of (sum_j |d_j q(lambda_j)|^2)^{1/2} over q(0) = 1 of degree <= k.
// With D = diag(lambda) this is exactly the step-k minimal residual of
// D x = d, so we evaluate it through the Arnoldi recurrence instead of an
// explicit power basis; the latter loses accuracy exponentially in k.
double weighted_poly_min(std::span<const Complex> weights, std::span<const Complex> lambdas,
                         std::size_t k)
{
    Vector d(weights.begin(), weights.end());
    if (k == 0 || d.empty())
        return norm2(d);
    Vector lam(lambdas.begin(), lambdas.end());
    LinearOp diag_op = [&lam](const Vector& v) {
        Vector out(v.size());
        for (std::size_t j = 0; j < v.size(); ++j)
            out[j] = lam[j] * v[j];
        return out;
    };
    SolveTrace t = gmres(diag_op, identity_op, d, 0.0, k);
    return t.residual_norms.back();
}

}  // namespace

double bound_25(const EigenBasis& basis, const WeightRecord& w, std::size_t k)
{
    return basis.z_norm2() * weighted_poly_min(w.w, basis.eigenvalues(), k);
}

double bound_26a(const EigenBasis& basis, const WeightRecord& w, std::size_t k)
{
    if (k < 1)
        throw std::invalid_argument("bound_26a: k >= 1 required");
    if (k == 1)
        return basis.z_norm2() * w.wt_norm;
    std::span<const Complex> tail(basis.eigenvalues());
    return basis.z_norm2() * weighted_poly_min(w.wt, tail.subspan(1), k - 1);
}

DiskEnvelope disk_envelope(std::span<const Complex> lambda_tail)
{
    if (lambda_tail.empty())
        throw std::invalid_argument("disk_envelope: empty eigenvalue set");
    double re_lo = std::numeric_limits<double>::max(), re_hi = std::numeric_limits<double>::lowest();
    double im_lo = re_lo, im_hi = re_hi;
    for (const Complex& l : lambda_tail) {
        re_lo = std::min(re_lo, l.real());
        re_hi = std::max(re_hi, l.real());
        im_lo = std::min(im_lo, l.imag());
        im_hi = std::max(im_hi, l.imag());
    }
    DiskEnvelope env;
    env.center = Complex(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi));
    env.radius = 0.0;
    for (const Complex& l : lambda_tail)
        env.radius = std::max(env.radius, std::abs(l - env.center));
    env.S = 1.0;
    if (env.radius == 0.0) {
        env.C = std::numeric_limits<double>::infinity();
        env.valid = std::abs(env.center) > 0.0;
    } else if (env.radius < std::abs(env.center)) {
        env.C = std::abs(env.center) / env.radius;
        env.valid = true;
    } else {
        env.C = 1.0;
        env.valid = false;
    }
    return env;
}

double iter_lower_bound(double C, double S, double z_norm, double wt_norm, double tau)
{
    if (!(C > 1.0))
        throw NumericalError("iter_lower_bound: envelope ratio C must exceed 1");
    if (!(tau > 0.0) || !(wt_norm > 0.0))
        throw std::invalid_argument("iter_lower_bound: tau and wt_norm must be positive");
    return 1.0 + (std::log(S) + std::log(z_norm * wt_norm / tau)) / std::log(C);
}

std::pair<double, double> initial_decrease_constants(const EigenBasis& basis, Complex /*sigma*/)
{
    // The basis stores eigenvalues of the shifted operator, so
    // |gamma_1 - gamma_j| = |lambda_1 - lambda_j| and |gamma_1 - sigma| =
    // |lambda_1|; the shift cancels.
    const std::vector<Complex>& lam = basis.eigenvalues();
    if (lam[0] == 0.0)
        throw NumericalError("initial_decrease_constants: target eigenvalue equals the shift");
    double c1 = 0.0;
    for (std::size_t j = 1; j < lam.size(); ++j)
        c1 = std::max(c1, std::abs(lam[0] - lam[j]) / std::abs(lam[0]));
    return {c1, basis.z_norm2() * c1};
}

double block_bound(const EigenBasis& basis, const DenseMatrix& W, std::size_t k)
{
    const std::size_t n = W.nrows;
    const std::size_t u = W.ncols;
    if (n != basis.dim())
        throw std::invalid_argument("block_bound: dimension mismatch");
    Vector d(n * u);
    Vector lam(n * u);
    for (std::size_t l = 0; l < u; ++l)
        for (std::size_t j = 0; j < n; ++j) {
            d[l * n + j] = W(j, l);
            lam[l * n + j] = basis.eigenvalues()[j];
        }
    return basis.z_norm2() * weighted_poly_min(d, lam, k);
}

std::pair<double, double> block_weight_split(const DenseMatrix& W, std::size_t u)
{
    if (u > W.nrows || u != W.ncols)
        throw std::invalid_argument("block_weight_split: need an n x u matrix with n >= u");
    double top = 0.0, bottom = 0.0;
    for (std::size_t l = 0; l < u; ++l)
        for (std::size_t j = 0; j < W.nrows; ++j)
            (j < u ? top : bottom) += std::norm(W(j, l));
    return {std::sqrt(top), std::sqrt(bottom)};
}

BoundReport make_bound_report(const EigenBasis& basis, const WeightRecord& w, std::size_t k,
                              double tau)
{
    BoundReport rep;
    rep.k = k;
    rep.bound_25 = bound_25(basis, w, k);
    rep.bound_26a = (k >= 1) ? bound_26a(basis, w, k) : 0.0;
    rep.bound_26k1 = (k == 1) ? rep.bound_26a : 0.0;
    std::span<const Complex> tail(basis.eigenvalues());
    DiskEnvelope env = disk_envelope(tail.subspan(1));
    rep.disk_C = env.C;
    rep.disk_S = env.S;
    if (env.valid && k >= 1) {
        rep.bound_26b_disk =
            basis.z_norm2() * w.wt_norm * env.S * std::pow(1.0 / env.C, static_cast<double>(k - 1));
    } else {
        rep.bound_26b_disk = std::numeric_limits<double>::infinity();
    }
    if (env.valid && w.wt_norm > 0.0 && tau > 0.0)
        rep.iter_lower = iter_lower_bound(env.C, env.S, basis.z_norm2(), w.wt_norm, tau);
    else
        rep.iter_lower = std::numeric_limits<double>::quiet_NaN();
    return rep;
}

}  // namespace itereig
