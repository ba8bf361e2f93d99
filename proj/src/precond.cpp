#include "itereig/precond.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace itereig {

IluFactors ilu_factor(const SparseMatrix& A, double droptol)
{
    if (A.nrows != A.ncols)
        throw std::invalid_argument("ilu_factor: square matrix required");
    const std::size_t n = A.nrows;
    const std::vector<double> rownorm = sparse_row_norms(A);

    for (std::size_t i = 0; i < n; ++i) {
        bool has_diag = false;
        for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
            if (A.col_indices[k] == i)
                has_diag = true;
        if (!has_diag)
            throw NumericalError("ilu_factor: structurally zero diagonal in row " +
                                 std::to_string(i));
    }

    // U rows kept for elimination: strictly-upper entries plus the pivot
    std::vector<std::vector<std::pair<std::size_t, Complex>>> urows(n);
    std::vector<Complex> udiag(n);
    std::vector<Triplet> lt, ut;

    std::vector<Complex> work(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::set<std::size_t> lower, upper;
        for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
            const std::size_t j = A.col_indices[k];
            work[j] = A.values[k];
            if (j < i)
                lower.insert(j);
            else if (j > i)
                upper.insert(j);
        }
        const double drop = droptol * rownorm[i];

        for (auto it = lower.begin(); it != lower.end(); ++it) {
            const std::size_t k = *it;
            const Complex factor = work[k] / udiag[k];
            if (std::abs(factor) < drop) {
                work[k] = 0.0;
                continue;
            }
            work[k] = factor;
            for (const auto& [j, uval] : urows[k]) {
                if (work[j] == 0.0) {
                    if (j < i)
                        lower.insert(j);
                    else if (j > i)
                        upper.insert(j);
                }
                work[j] -= factor * uval;
            }
        }

        const Complex pivot = work[i];
        if (std::abs(pivot) < 1e-14 * rownorm[i]) {
            for (std::size_t j : lower)
                work[j] = 0.0;
            for (std::size_t j : upper)
                work[j] = 0.0;
            work[i] = 0.0;
            throw NumericalError("ilu_factor: pivot breakdown in row " + std::to_string(i));
        }

        for (std::size_t j : lower) {
            if (work[j] != 0.0)
                lt.push_back({i, j, work[j]});
            work[j] = 0.0;
        }
        lt.push_back({i, i, 1.0});
        udiag[i] = pivot;
        ut.push_back({i, i, pivot});
        work[i] = 0.0;
        for (std::size_t j : upper) {
            if (work[j] != 0.0 && std::abs(work[j]) >= drop) {
                ut.push_back({i, j, work[j]});
                urows[i].push_back({j, work[j]});
            }
            work[j] = 0.0;
        }
    }

    IluFactors F;
    F.L = sparse_from_triplets(n, n, std::move(lt));
    F.U = sparse_from_triplets(n, n, std::move(ut));
    F.droptol = droptol;
    return F;
}

Vector ilu_apply_inverse(const IluFactors& F, std::span<const Complex> v)
{
    const std::size_t n = F.L.nrows;
    if (v.size() != n)
        throw std::invalid_argument("ilu_apply_inverse: dimension mismatch");
    Vector x(v.begin(), v.end());
    for (std::size_t i = 0; i < n; ++i) {
        Complex s = x[i];
        for (std::size_t k = F.L.row_offsets[i]; k < F.L.row_offsets[i + 1]; ++k) {
            const std::size_t j = F.L.col_indices[k];
            if (j < i)
                s -= F.L.values[k] * x[j];
        }
        x[i] = s;  // unit diagonal
    }
    for (std::size_t i = n; i-- > 0;) {
        Complex s = x[i];
        Complex diag = 0.0;
        for (std::size_t k = F.U.row_offsets[i]; k < F.U.row_offsets[i + 1]; ++k) {
            const std::size_t j = F.U.col_indices[k];
            if (j == i)
                diag = F.U.values[k];
            else
                s -= F.U.values[k] * x[j];
        }
        x[i] = s / diag;
    }
    return x;
}

TunedPrecond::TunedPrecond(std::shared_ptr<const Precond> base, Vector y, Vector t)
    : base_(std::move(base)), y_(std::move(y)), t_(std::move(t))
{
    base_inv_t_ = base_->apply_inverse(t_);
    denom_ = dot(y_, base_inv_t_);
    if (std::abs(denom_) < 1e-14 * std::max(1.0, norm2(base_inv_t_)))
        throw NumericalError("tuned preconditioner: rank-one update denominator vanishes");
}

Vector TunedPrecond::apply_inverse(const Vector& v) const
{
    Vector w = base_->apply_inverse(v);
    const Complex s = dot(y_, w) / denom_;
    if (s == 0.0)
        return w;
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] -= (base_inv_t_[i] - y_[i]) * s;
    return w;
}

std::shared_ptr<TunedPrecond> tuned_make(std::shared_ptr<const Precond> base, const Vector& y,
                                         TuneTarget variant, const TunedContext& ctx)
{
    Vector t;
    switch (variant) {
        case TuneTarget::Identity:
            t = y;
            break;
        case TuneTarget::ATarget:
            if (!ctx.A)
                throw ConfigError("tuned_make: A-target needs the matrix A");
            t = spmv(*ctx.A, y);
            break;
        case TuneTarget::BTarget:
            if (!ctx.apply_B)
                throw ConfigError("tuned_make: B-target needs the operator B");
            t = (*ctx.apply_B)(y);
            break;
        case TuneTarget::Lambda:
            if (ctx.lambda == 0.0)
                throw NumericalError("tuned_make: lambda-target requires lambda != 0");
            t = scaled(y, ctx.lambda);
            break;
        case TuneTarget::MTarget:
            if (!ctx.M)
                throw ConfigError("tuned_make: M-target needs the mass matrix");
            t = spmv(*ctx.M, y);
            break;
    }
    return std::make_shared<TunedPrecond>(std::move(base), y, std::move(t));
}

BlockTunedPrecond::BlockTunedPrecond(std::shared_ptr<const Precond> base, DenseMatrix Y,
                                     DenseMatrix T)
    : base_(std::move(base)), Y_(std::move(Y))
{
    const std::size_t n = Y_.nrows;
    const std::size_t u = Y_.ncols;
    if (T.nrows != n || T.ncols != u)
        throw std::invalid_argument("BlockTunedPrecond: block shape mismatch");

    // Gram matrix Y^H Y and update directions D = (P^{-1}T - Y) (Y^H Y)^{-1}
    DenseMatrix G(u, u);
    for (std::size_t j = 0; j < u; ++j)
        for (std::size_t i = 0; i < u; ++i)
            G(i, j) = dot(Y_.col(i), Y_.col(j));
    LuFactor glu(G);

    DenseMatrix CmY(n, u);
    for (std::size_t j = 0; j < u; ++j) {
        Vector tj(T.col(j).begin(), T.col(j).end());
        Vector cj = base_->apply_inverse(tj);
        for (std::size_t i = 0; i < n; ++i)
            CmY(i, j) = cj[i] - Y_(i, j);
    }
    // right-multiply by G^{-1}: solve G^T X^T ... column view: D = CmY * G^{-1}
    // => D G = CmY, i.e. each row of D solves G^H d^H = (CmY row)^H.
    correction_ = DenseMatrix(n, u);
    for (std::size_t i = 0; i < n; ++i) {
        Vector row(u);
        for (std::size_t j = 0; j < u; ++j)
            row[j] = std::conj(CmY(i, j));
        Vector sol = glu.solve_adjoint(row);
        for (std::size_t j = 0; j < u; ++j)
            correction_(i, j) = std::conj(sol[j]);
    }

    DenseMatrix S(u, u);
    for (std::size_t j = 0; j < u; ++j)
        for (std::size_t i = 0; i < u; ++i)
            S(i, j) = dot(Y_.col(i), correction_.col(j)) + ((i == j) ? 1.0 : 0.0);
    small_ = std::make_unique<LuFactor>(std::move(S));
}

Vector BlockTunedPrecond::apply_inverse(const Vector& v) const
{
    Vector w = base_->apply_inverse(v);
    const std::size_t u = Y_.ncols;
    Vector s(u);
    for (std::size_t j = 0; j < u; ++j)
        s[j] = dot(Y_.col(j), w);
    Vector z = small_->solve(s);
    for (std::size_t j = 0; j < u; ++j)
        axpy(-z[j], correction_.col(j), std::span<Complex>(w));
    return w;
}

std::vector<Complex> cheb_nu(double a, double b, std::size_t d)
{
    if (a <= 0.0 || a > b)
        throw NumericalError(
            "cheb_nu: interval must satisfy 0 < a <= b (apply interval_guard first)");
    std::vector<Complex> nu(d + 1);
    for (std::size_t h = 1; h <= d + 1; ++h) {
        const double phi = (2.0 * h - 1.0) / (2.0 * (d + 1));
        nu[h - 1] = 2.0 / (b + a - (b - a) * std::cos(std::numbers::pi * phi));
    }
    return nu;
}

std::vector<Complex> nu_to_mu(const std::vector<Complex>& nu)
{
    // g_h(z) = g_{h-1}(z) - nu_h z g_{h-1}(z), g_0 = 1; then g = 1 - z p(z).
    std::vector<Complex> g{1.0};
    for (const Complex& nuh : nu) {
        std::vector<Complex> next(g.size() + 1, 0.0);
        for (std::size_t k = 0; k < g.size(); ++k) {
            next[k] += g[k];
            next[k + 1] -= nuh * g[k];
        }
        g = std::move(next);
    }
    std::vector<Complex> mu(g.size() - 1);
    for (std::size_t h = 0; h < mu.size(); ++h)
        mu[h] = -g[h + 1];
    return mu;
}

std::pair<double, double> interval_guard(double a, double b)
{
    if (a > b)
        throw std::invalid_argument("interval_guard: need a <= b");
    if (a == 0.0 && b == 0.0)
        throw std::invalid_argument("interval_guard: empty interval at the origin");
    if ((a > 0.0 && b > 0.0) || (a < 0.0 && b < 0.0))
        return {a, b};
    if (b > 0.0 && a < 0.0 && -a <= 0.1 * b)
        return {-a, b - 2.0 * a};
    if (a < 0.0 && b > 0.0 && b <= 0.1 * (-a))
        return {a - 2.0 * b, -b};
    throw NumericalError("interval_guard: spectrum straddles the origin");
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(std::size_t npts, std::vector<double>& x, std::vector<double>& w)
{
    x.resize(npts);
    w.resize(npts);
    const double pi = std::numbers::pi;
    for (std::size_t i = 0; i < (npts + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (npts + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 0; j < npts; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = npts * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15)
                break;
        }
        x[i] = -z;
        x[npts - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[npts - 1 - i] = w[i];
    }
}

bool contour_conj_symmetric(const std::vector<Segment>& segs)
{
    auto matches = [](const Segment& s, const Segment& t) {
        const double tol = 1e-12 * (std::abs(s.a) + std::abs(s.b) + 1.0);
        const Complex ca = std::conj(s.a), cb = std::conj(s.b);
        return (std::abs(t.a - ca) < tol && std::abs(t.b - cb) < tol) ||
               (std::abs(t.a - cb) < tol && std::abs(t.b - ca) < tol);
    };
    for (const Segment& s : segs) {
        if (std::abs(s.a.imag()) < 1e-12 * (1.0 + std::abs(s.a)) &&
            std::abs(s.b.imag()) < 1e-12 * (1.0 + std::abs(s.b)))
            continue;
        bool found = false;
        for (const Segment& t : segs)
            if (matches(s, t)) {
                found = true;
                break;
            }
        if (!found)
            return false;
    }
    return true;
}

}  // namespace

std::vector<Complex> contour_ls_mu(const std::vector<Segment>& segments, std::size_t d)
{
    if (segments.empty())
        throw std::invalid_argument("contour_ls_mu: need at least one segment");

    // quadrature points and weights along the contour
    std::vector<Complex> pts;
    std::vector<double> wts;
    double total_len = 0.0;
    for (const Segment& s : segments)
        total_len += std::abs(s.b - s.a);
    if (total_len == 0.0) {
        // all segments degenerate: point masses
        for (const Segment& s : segments) {
            pts.push_back(s.a);
            wts.push_back(1.0);
        }
    } else {
        std::vector<double> gx, gw;
        gauss_legendre(32, gx, gw);
        for (const Segment& s : segments) {
            const double len = std::abs(s.b - s.a);
            if (len == 0.0)
                continue;
            for (std::size_t q = 0; q < gx.size(); ++q) {
                const double t = 0.5 * (gx[q] + 1.0);
                pts.push_back(s.a + (s.b - s.a) * t);
                wts.push_back(gw[q] * 0.5 * len / total_len);
            }
        }
    }
    double wsum = 0.0;
    for (double w : wts)
        wsum += w;
    for (double& w : wts)
        w /= wsum;

    double zmax = 0.0;
    for (const Complex& z : pts)
        zmax = std::max(zmax, std::abs(z));
    // distance from the origin to each segment, not just to quadrature points
    double zmin = std::numeric_limits<double>::max();
    for (const Segment& s : segments) {
        const Complex d = s.b - s.a;
        const double len2 = std::norm(d);
        double t = 0.0;
        if (len2 > 0.0)
            t = std::clamp(-(s.a.real() * d.real() + s.a.imag() * d.imag()) / len2, 0.0, 1.0);
        zmin = std::min(zmin, std::abs(s.a + t * d));
    }
    if (zmin <= 1e-12 * zmax)
        throw NumericalError("contour_ls_mu: contour passes through the origin");
    const double scale_fac = zmax;

    // monomial powers zhat^{h+1} at each quadrature point, zhat = z / zmax
    const std::size_t k = d + 1;
    std::vector<std::vector<Complex>> powers(pts.size());
    for (std::size_t q = 0; q < pts.size(); ++q) {
        const Complex zh = pts[q] / scale_fac;
        powers[q].resize(k);
        Complex p = zh;
        for (std::size_t h = 0; h < k; ++h) {
            powers[q][h] = p;
            p *= zh;
        }
    }

    DenseMatrix G(k, k);
    Vector beta(k, 0.0);
    for (std::size_t q = 0; q < pts.size(); ++q)
        for (std::size_t p = 0; p < k; ++p) {
            const Complex cp = std::conj(powers[q][p]) * wts[q];
            beta[p] += cp;
            for (std::size_t r = 0; r < k; ++r)
                G(p, r) += cp * powers[q][r];
        }

    Vector muhat;
    try {
        muhat = LuFactor(G).solve(beta);
    } catch (const NumericalError&) {
        throw NumericalError("contour_ls_mu: Gram matrix numerically singular; reduce the degree");
    }
    // sanity: residual of the normal equations
    {
        Vector r = matvec(G, muhat);
        axpy(-1.0, beta, std::span<Complex>(r));
        if (norm2(r) > 1e-6 * std::max(1.0, norm2(beta)))
            throw NumericalError(
                "contour_ls_mu: Gram matrix numerically singular; reduce the degree");
    }

    std::vector<Complex> mu(k);
    double s = 1.0;
    for (std::size_t h = 0; h < k; ++h) {
        s *= scale_fac;
        mu[h] = muhat[h] / s;
    }
    if (contour_conj_symmetric(segments))
        for (Complex& m : mu)
            m = Complex(m.real(), 0.0);
    return mu;
}

Vector poly_apply_inverse(const LinearOp& apply_B, const std::vector<Complex>& mu,
                          const Vector& v)
{
    if (mu.empty())
        throw std::invalid_argument("poly_apply_inverse: empty coefficient list");
    Vector result = scaled(v, mu.back());
    for (std::size_t h = mu.size() - 1; h-- > 0;) {
        result = apply_B(result);
        axpy(mu[h], v, std::span<Complex>(result));
    }
    return result;
}

Vector poly_apply_inverse_roots(const LinearOp& apply_B, const std::vector<Complex>& nu,
                                const Vector& v)
{
    if (nu.empty())
        throw std::invalid_argument("poly_apply_inverse_roots: empty root list");
    Vector result = scaled(v, nu[0]);
    for (std::size_t h = 1; h < nu.size(); ++h) {
        Vector bp = apply_B(result);
        for (std::size_t i = 0; i < result.size(); ++i)
            result[i] += nu[h] * (v[i] - bp[i]);
    }
    return result;
}

PolyCoefficients poly_setup(const LinearOp& apply_B, std::size_t n, std::size_t degree,
                            PolyScheme scheme, std::pair<double, double>* interval_override)
{
    const std::size_t m = std::min<std::size_t>(20, n);
    Vector seed(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<Complex> ritz = arnoldi_ritz(apply_B, n, m, seed);

    bool complex_spectrum = false;
    for (const Complex& r : ritz)
        if (std::abs(r.imag()) > 1e-8 * std::abs(r.real()))
            complex_spectrum = true;

    PolyCoefficients out;
    if (scheme == PolyScheme::Chebyshev || !complex_spectrum) {
        double a, b;
        if (interval_override) {
            a = interval_override->first;
            b = interval_override->second;
        } else {
            a = std::numeric_limits<double>::max();
            b = std::numeric_limits<double>::lowest();
            for (const Complex& r : ritz) {
                a = std::min(a, r.real());
                b = std::max(b, r.real());
            }
        }
        std::tie(a, b) = interval_guard(a, b);
        // negative-axis intervals: work on [-b', -a'] of -B and flip signs
        const bool negative = a < 0.0;
        if (negative)
            std::tie(a, b) = std::make_pair(-b, -a);
        if (scheme == PolyScheme::Chebyshev) {
            out.nu = cheb_nu(a, b, degree);
            if (negative)
                for (Complex& x : out.nu)
                    x = -x;
            out.mu = nu_to_mu(out.nu);
            out.provenance = "cheb";
        } else {
            const double sgn = negative ? -1.0 : 1.0;
            std::vector<Segment> segs{{Complex(sgn * a, 0.0), Complex(sgn * b, 0.0)}};
            out.mu = contour_ls_mu(segs, degree);
            out.provenance = "contour";
        }
        return out;
    }

    // complex spectrum: convex hull of the Ritz values and their conjugates
    std::vector<Complex> ptset = ritz;
    for (const Complex& r : ritz)
        ptset.push_back(std::conj(r));
    std::sort(ptset.begin(), ptset.end(), [](const Complex& x, const Complex& y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    ptset.erase(std::unique(ptset.begin(), ptset.end(),
                            [](const Complex& x, const Complex& y) {
                                return std::abs(x - y) < 1e-12 * (1.0 + std::abs(x));
                            }),
                ptset.end());
    // Andrew's monotone chain
    auto cross = [](const Complex& o, const Complex& a, const Complex& b) {
        return (a.real() - o.real()) * (b.imag() - o.imag()) -
               (a.imag() - o.imag()) * (b.real() - o.real());
    };
    std::vector<Complex> hull;
    for (int pass = 0; pass < 2; ++pass) {
        const std::size_t base = hull.size();
        auto scan = [&](const Complex& p) {
            while (hull.size() >= base + 2 &&
                   cross(hull[hull.size() - 2], hull[hull.size() - 1], p) <= 0.0)
                hull.pop_back();
            hull.push_back(p);
        };
        if (pass == 0)
            for (const Complex& p : ptset)
                scan(p);
        else
            for (auto it = ptset.rbegin(); it != ptset.rend(); ++it)
                scan(*it);
        hull.pop_back();
    }
    std::vector<Segment> segs;
    if (hull.size() < 2) {
        segs.push_back({ptset.front(), ptset.back()});
    } else {
        for (std::size_t i = 0; i < hull.size(); ++i)
            segs.push_back({hull[i], hull[(i + 1) % hull.size()]});
    }
    out.mu = contour_ls_mu(segs, degree);
    out.provenance = "contour";
    return out;
}

}  // namespace itereig
