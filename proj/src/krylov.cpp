#include "itereig/krylov.hpp"

#include <algorithm>
#include <cmath>

namespace itereig {

namespace {

// Orthogonalize w against the columns in basis (MGS + one reorthogonalization
// pass), accumulating coefficients into h.
void orthogonalize(const std::vector<Vector>& basis, Vector& w, std::vector<Complex>& h)
{
    h.assign(basis.size(), 0.0);
    for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const Complex c = dot(basis[i], w);
            h[i] += c;
            axpy(-c, basis[i], std::span<Complex>(w));
        }
}

// Householder QR without pivoting, reusable for several right-hand sides.
class QrFactor {
  public:
    explicit QrFactor(DenseMatrix A) : r_(std::move(A))
    {
        const std::size_t m = r_.nrows;
        const std::size_t n = r_.ncols;
        const std::size_t kmax = std::min(m, n);
        vs_.resize(kmax);
        betas_.resize(kmax);
        for (std::size_t k = 0; k < kmax; ++k) {
            auto colk = r_.col(k).subspan(k);
            Vector v(colk.begin(), colk.end());
            const double xnorm = norm2(v);
            Complex diag = 0.0, beta = 0.0;
            if (xnorm > 0.0) {
                const Complex alpha = v[0];
                const double aabs = std::abs(alpha);
                const Complex phase = (aabs == 0.0) ? Complex(1.0) : alpha / aabs;
                diag = -phase * xnorm;
                v[0] = alpha - diag;
                const double vn = norm2(v);
                beta = (vn == 0.0) ? Complex(0.0) : Complex(2.0) / (vn * vn);
            }
            vs_[k] = std::move(v);
            betas_[k] = beta;
            r_(k, k) = diag;
            for (std::size_t i = k + 1; i < m; ++i)
                r_(i, k) = 0.0;
            for (std::size_t j = k + 1; j < n; ++j)
                reflect(k, r_.col(j).subspan(k));
        }
    }

    // least squares solve; returns coefficient vector and residual norm
    std::pair<Vector, double> solve(std::span<const Complex> b) const
    {
        Vector qtb(b.begin(), b.end());
        const std::size_t n = r_.ncols;
        for (std::size_t k = 0; k < vs_.size(); ++k)
            reflect(k, std::span<Complex>(qtb).subspan(k));
        Vector y(n, 0.0);
        for (std::size_t k = n; k-- > 0;) {
            Complex s = qtb[k];
            for (std::size_t j = k + 1; j < n; ++j)
                s -= r_(k, j) * y[j];
            y[k] = s / r_(k, k);
        }
        Vector tail(qtb.begin() + static_cast<std::ptrdiff_t>(n), qtb.end());
        return {std::move(y), norm2(tail)};
    }

  private:
    void reflect(std::size_t k, std::span<Complex> x) const
    {
        if (betas_[k] == 0.0)
            return;
        const Complex s = betas_[k] * dot(vs_[k], x);
        axpy(-s, vs_[k], x);
    }

    DenseMatrix r_;
    std::vector<Vector> vs_;
    std::vector<Complex> betas_;
};

}  // namespace

SolveTrace gmres(const LinearOp& apply_B, const LinearOp& apply_Pinv, const Vector& rhs,
                 double tol, std::size_t max_it, bool relative)
{
    SolveTrace trace;
    const std::size_t n = rhs.size();
    const double beta = norm2(rhs);
    const double threshold = relative ? tol * beta : tol;
    trace.final_tol = threshold;
    trace.residual_norms.push_back(beta);
    trace.solution.assign(n, 0.0);
    if (beta == 0.0 || beta <= threshold) {
        trace.converged = true;
        return trace;
    }

    std::vector<Vector> V;
    V.push_back(scaled(rhs, 1.0 / beta));
    std::vector<std::vector<Complex>> Hcols;  // column k: rotated entries rows 0..k
    std::vector<Complex> cs, sn;
    Vector g;
    g.push_back(beta);

    bool breakdown = false;
    std::size_t k = 0;
    for (; k < max_it; ++k) {
        Vector w = apply_B(apply_Pinv(V[k]));
        std::vector<Complex> h;
        orthogonalize(V, w, h);
        const double hk1 = norm2(w);

        // previously computed rotations
        for (std::size_t i = 0; i + 1 <= k; ++i) {
            const Complex t0 = cs[i] * h[i] + sn[i] * h[i + 1];
            const Complex t1 = -std::conj(sn[i]) * h[i] + std::conj(cs[i]) * h[i + 1];
            h[i] = t0;
            h[i + 1] = t1;
        }

        const double t = std::sqrt(std::norm(h[k]) + hk1 * hk1);
        if (t == 0.0) {
            cs.push_back(1.0);
            sn.push_back(0.0);
        } else {
            cs.push_back(std::conj(h[k]) / t);
            sn.push_back(hk1 / t);
        }
        h[k] = t;
        h.push_back(0.0);

        g.push_back(-std::conj(sn[k]) * g[k]);
        g[k] = cs[k] * g[k];

        Hcols.push_back(std::move(h));
        const double resid = std::abs(g[k + 1]);
        trace.residual_norms.push_back(resid);

        if (hk1 <= 1e-14 * t) {
            // happy breakdown: the Krylov space is invariant, solve is exact
            breakdown = true;
            ++k;
            break;
        }
        V.push_back(scaled(w, 1.0 / hk1));
        if (resid <= threshold) {
            ++k;
            break;
        }
    }
    trace.iterations = k;

    // back substitution on the rotated Hessenberg
    Vector y(k, 0.0);
    for (std::size_t i = k; i-- > 0;) {
        Complex s = g[i];
        for (std::size_t j = i + 1; j < k; ++j)
            s -= Hcols[j][i] * y[j];
        y[i] = s / Hcols[i][i];
    }
    Vector xt(n, 0.0);
    for (std::size_t j = 0; j < k; ++j)
        axpy(y[j], V[j], std::span<Complex>(xt));
    trace.solution = apply_Pinv(xt);

    // explicit residual recomputation at exit
    {
        Vector r = apply_B(trace.solution);
        scale(r, -1.0);
        axpy(1.0, rhs, std::span<Complex>(r));
        const double true_resid = norm2(r);
        double& last = trace.residual_norms.back();
        if (std::abs(true_resid - last) > 1e-8 * std::max(1.0, beta))
            last = true_resid;
    }

    trace.converged = breakdown || trace.residual_norms.back() <= threshold;
    return trace;
}

BlockSolveTrace block_gmres(const LinearOp& apply_B, const LinearOp& apply_Pinv,
                            const DenseMatrix& RHS, double tol, std::size_t max_it)
{
    const std::size_t n = RHS.nrows;
    const std::size_t u = RHS.ncols;
    if (u == 0)
        throw std::invalid_argument("block_gmres: empty right-hand side block");

    if (u == 1) {
        Vector rhs(RHS.col(0).begin(), RHS.col(0).end());
        SolveTrace st = gmres(apply_B, apply_Pinv, rhs, tol, max_it);
        BlockSolveTrace bt;
        bt.residual_fro_norms = st.residual_norms;
        bt.iterations = st.iterations;
        bt.converged = st.converged;
        bt.final_tol = st.final_tol;
        bt.solution_block = DenseMatrix(n, 1);
        std::copy(st.solution.begin(), st.solution.end(), bt.solution_block.col(0).begin());
        return bt;
    }

    BlockSolveTrace trace;
    trace.final_tol = tol;
    trace.solution_block = DenseMatrix(n, u);

    double max_col_norm = 0.0;
    for (std::size_t j = 0; j < u; ++j)
        max_col_norm = std::max(max_col_norm, norm2(RHS.col(j)));
    const double deflate_tol = 1e-12 * max_col_norm;

    std::vector<Vector> basis;
    // coefficients of Y in the basis: rows follow basis order
    std::vector<std::vector<Complex>> R0(u);
    std::vector<std::size_t> prev_block;
    for (std::size_t j = 0; j < u; ++j) {
        Vector w(RHS.col(j).begin(), RHS.col(j).end());
        std::vector<Complex> h;
        orthogonalize(basis, w, h);
        R0[j] = std::move(h);
        const double nrm = norm2(w);
        if (nrm > deflate_tol) {
            R0[j].push_back(nrm);
            prev_block.push_back(basis.size());
            basis.push_back(scaled(w, 1.0 / nrm));
        }
    }

    double fro0 = 0.0;
    for (std::size_t j = 0; j < u; ++j)
        for (const Complex& c : R0[j])
            fro0 += std::norm(c);
    fro0 = std::sqrt(fro0);
    trace.residual_fro_norms.push_back(fro0);
    if (fro0 <= tol || prev_block.empty()) {
        trace.converged = true;
        return trace;
    }

    // H columns indexed by multiplied basis vector; entries are (row, value)
    std::vector<std::vector<Complex>> Hcols;
    std::size_t m_mult = 0;
    std::vector<std::vector<Complex>> best_C;
    bool total_deflation = false;

    for (std::size_t step = 0; step < max_it; ++step) {
        std::vector<std::size_t> new_block;
        for (std::size_t idx : prev_block) {
            Vector w = apply_B(apply_Pinv(basis[idx]));
            std::vector<Complex> h;
            orthogonalize(basis, w, h);
            const double nrm = norm2(w);
            if (nrm > deflate_tol) {
                h.push_back(nrm);
                new_block.push_back(basis.size());
                basis.push_back(scaled(w, 1.0 / nrm));
            }
            Hcols.push_back(std::move(h));
        }
        m_mult += prev_block.size();

        // least squares: min || E_R - Hbar C ||_F over the current basis
        const std::size_t s = basis.size();
        DenseMatrix Hbar(s, m_mult);
        {
            std::size_t col = 0;
            for (std::size_t j = 0; j < Hcols.size(); ++j, ++col)
                for (std::size_t i = 0; i < Hcols[j].size(); ++i)
                    Hbar(i, col) = Hcols[j][i];
        }
        QrFactor qr(Hbar);
        double fro2 = 0.0;
        std::vector<std::vector<Complex>> C(u);
        for (std::size_t j = 0; j < u; ++j) {
            Vector e(s, 0.0);
            for (std::size_t i = 0; i < R0[j].size(); ++i)
                e[i] = R0[j][i];
            auto [cj, rj] = qr.solve(e);
            C[j] = std::move(cj);
            fro2 += rj * rj;
        }
        const double fro = std::sqrt(fro2);
        trace.residual_fro_norms.push_back(fro);
        best_C = std::move(C);
        ++trace.iterations;

        if (fro <= tol) {
            trace.converged = true;
            break;
        }
        if (new_block.empty()) {
            // invariant block subspace found; nothing further can improve
            total_deflation = true;
            trace.converged = true;
            break;
        }
        prev_block = std::move(new_block);
    }
    (void)total_deflation;

    if (!best_C.empty()) {
        for (std::size_t j = 0; j < u; ++j) {
            Vector xt(n, 0.0);
            for (std::size_t i = 0; i < m_mult; ++i)
                axpy(best_C[j][i], basis[i], std::span<Complex>(xt));
            Vector x = apply_Pinv(xt);
            std::copy(x.begin(), x.end(), trace.solution_block.col(j).begin());
        }
    }
    if (!trace.converged)
        trace.converged = trace.residual_fro_norms.back() <= tol;
    return trace;
}

std::vector<Complex> hessenberg_eigenvalues(DenseMatrix H)
{
    const std::size_t n = H.nrows;
    if (H.ncols != n || n == 0)
        throw std::invalid_argument("hessenberg_eigenvalues: square matrix required");
    const double eps = 1e-15;
    std::vector<Complex> eig;
    eig.reserve(n);

    // global floor for the deflation test: a purely local threshold lets a
    // 2x2 block with equal diagonals and a roundoff-level coupling cycle
    // forever (the shifted step only permutes it), so subdiagonals that are
    // negligible against the matrix scale deflate as well
    double hscale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        hscale = std::max(hscale, std::abs(H(i, i)));
        if (i + 1 < n)
            hscale = std::max(hscale, std::abs(H(i + 1, i)));
    }
    auto negligible = [&](std::size_t i) {
        const double local = std::abs(H(i - 1, i - 1)) + std::abs(H(i, i));
        const double thresh = eps * std::max(local, hscale);
        if (std::abs(H(i, i - 1)) <= thresh)
            return true;
        // unbalanced pair: the block eigenvalues split by the geometric mean
        // of the two couplings, so a negligible product deflates as well
        return std::sqrt(std::abs(H(i, i - 1)) * std::abs(H(i - 1, i))) <= thresh;
    };

    std::size_t hi = n - 1;
    std::size_t stagnation = 0;
    const std::size_t max_sweeps = 200 * n + 200;
    for (std::size_t sweep = 0; sweep < max_sweeps;) {
        // deflate converged trailing eigenvalues
        while (hi > 0 && negligible(hi)) {
            eig.push_back(H(hi, hi));
            --hi;
            stagnation = 0;
        }
        if (hi == 0) {
            eig.push_back(H(0, 0));
            break;
        }
        // active block [lo, hi]
        std::size_t lo = hi;
        while (lo > 0 && !negligible(lo))
            --lo;

        // Wilkinson shift from the trailing 2x2 block
        Complex mu;
        {
            const Complex a = H(hi - 1, hi - 1), b = H(hi - 1, hi);
            const Complex c = H(hi, hi - 1), d = H(hi, hi);
            const Complex tr = a + d;
            const Complex det = a * d - b * c;
            const Complex disc = std::sqrt(tr * tr - 4.0 * det);
            const Complex r1 = (tr + disc) / 2.0;
            const Complex r2 = (tr - disc) / 2.0;
            mu = (std::abs(r1 - d) < std::abs(r2 - d)) ? r1 : r2;
        }
        if (++stagnation % 20 == 0)
            mu += std::abs(H(hi, hi - 1));  // exceptional shift

        // explicit single-shift QR step on the block: H - mu I = QR, H <- RQ + mu I
        for (std::size_t i = lo; i <= hi; ++i)
            H(i, i) -= mu;
        std::vector<Complex> cs(hi + 1, 1.0), sn(hi + 1, 0.0);
        for (std::size_t i = lo; i < hi; ++i) {
            const Complex x = H(i, i);
            const Complex y = H(i + 1, i);
            const double t = std::sqrt(std::norm(x) + std::norm(y));
            Complex c = 1.0, s = 0.0;
            if (t > 0.0) {
                c = std::conj(x) / t;
                s = std::conj(y) / t;
            }
            cs[i] = c;
            sn[i] = s;
            for (std::size_t j = i; j <= hi; ++j) {
                const Complex t0 = c * H(i, j) + s * H(i + 1, j);
                const Complex t1 = -std::conj(s) * H(i, j) + std::conj(c) * H(i + 1, j);
                H(i, j) = t0;
                H(i + 1, j) = t1;
            }
        }
        for (std::size_t i = lo; i < hi; ++i) {
            const Complex c = cs[i];
            const Complex s = sn[i];
            const std::size_t rend = std::min(hi, i + 1);
            for (std::size_t r = lo; r <= rend; ++r) {
                const Complex t0 = H(r, i) * std::conj(c) + H(r, i + 1) * std::conj(s);
                const Complex t1 = -H(r, i) * s + H(r, i + 1) * c;
                H(r, i) = t0;
                H(r, i + 1) = t1;
            }
        }
        for (std::size_t i = lo; i <= hi; ++i)
            H(i, i) += mu;
        ++sweep;
        if (sweep == max_sweeps)
            throw NumericalError("hessenberg_eigenvalues: QR iteration failed to converge");
    }
    std::reverse(eig.begin(), eig.end());
    return eig;
}

std::vector<Complex> small_dense_eigenvalues(DenseMatrix A)
{
    const std::size_t n = A.nrows;
    if (A.ncols != n || n == 0)
        throw std::invalid_argument("small_dense_eigenvalues: square matrix required");
    // Householder reduction to upper Hessenberg form
    for (std::size_t k = 0; k + 2 < n; ++k) {
        Vector v(n - k - 1);
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = A(k + 1 + i, k);
        const double xnorm = norm2(v);
        if (xnorm == 0.0)
            continue;
        const Complex alpha = v[0];
        const double aabs = std::abs(alpha);
        const Complex phase = (aabs == 0.0) ? Complex(1.0) : alpha / aabs;
        const Complex diag = -phase * xnorm;
        v[0] = alpha - diag;
        const double vn = norm2(v);
        if (vn == 0.0)
            continue;
        const Complex beta = Complex(2.0) / (vn * vn);
        // A <- H A
        for (std::size_t j = 0; j < n; ++j) {
            Complex s = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i)
                s += std::conj(v[i]) * A(k + 1 + i, j);
            s *= beta;
            for (std::size_t i = 0; i < v.size(); ++i)
                A(k + 1 + i, j) -= s * v[i];
        }
        // A <- A H
        for (std::size_t i = 0; i < n; ++i) {
            Complex s = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j)
                s += A(i, k + 1 + j) * v[j];
            s *= beta;
            for (std::size_t j = 0; j < v.size(); ++j)
                A(i, k + 1 + j) -= s * std::conj(v[j]);
        }
    }
    for (std::size_t j = 0; j + 2 < n; ++j)
        for (std::size_t i = j + 2; i < n; ++i)
            A(i, j) = 0.0;
    return hessenberg_eigenvalues(std::move(A));
}

std::vector<Complex> arnoldi_ritz(const LinearOp& apply_B, std::size_t n, std::size_t m,
                                  const Vector& seed)
{
    if (m < 1 || m > n)
        throw std::invalid_argument("arnoldi_ritz: need 1 <= m <= n");
    if (m > 50)
        throw ConfigError("arnoldi_ritz: subspace size capped at 50");
    if (seed.size() != n)
        throw std::invalid_argument("arnoldi_ritz: seed dimension mismatch");
    const double beta = norm2(seed);
    if (beta == 0.0)
        throw std::invalid_argument("arnoldi_ritz: zero seed");

    std::vector<Vector> V;
    V.push_back(scaled(seed, 1.0 / beta));
    DenseMatrix H(m, m);
    std::size_t j = 0;
    for (; j < m; ++j) {
        Vector w = apply_B(V[j]);
        std::vector<Complex> h;
        orthogonalize(V, w, h);
        for (std::size_t i = 0; i <= j; ++i)
            H(i, j) = h[i];
        const double hnext = norm2(w);
        if (hnext <= 1e-14 * std::max(1.0, norm2(h))) {
            ++j;
            break;  // exact invariant subspace of dimension j
        }
        if (j + 1 < m) {
            H(j + 1, j) = hnext;
            V.push_back(scaled(w, 1.0 / hnext));
        }
    }
    DenseMatrix Hj(j, j);
    for (std::size_t c = 0; c < j; ++c)
        for (std::size_t r = 0; r < j; ++r)
            Hj(r, c) = H(r, c);
    return hessenberg_eigenvalues(std::move(Hj));
}

}  // namespace itereig
