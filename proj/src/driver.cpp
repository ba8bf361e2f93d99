#include "itereig/driver.hpp"

#include <algorithm>
#include <cmath>

namespace itereig {

namespace {

// Deterministic phase: rotate so the largest-magnitude component is
// real-positive.
void fix_phase(Vector& x)
{
    std::size_t imax = 0;
    double best = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (std::abs(x[j]) > best) {
            best = std::abs(x[j]);
            imax = j;
        }
    if (best > 0.0)
        scale(x, std::conj(x[imax]) / best);
}

Vector eig_residual(const SparseMatrix& A, const SparseMatrix* M, Complex lambda, const Vector& x)
{
    Vector rho = spmv(A, x);
    if (M) {
        Vector mx = spmv(*M, x);
        axpy(-lambda, mx, std::span<Complex>(rho));
    } else {
        axpy(-lambda, x, std::span<Complex>(rho));
    }
    return rho;
}

std::shared_ptr<const Precond> step_precond(const ProblemSpec& spec, const LinearOp& apply_B,
                                            const Vector& x, Complex lambda)
{
    std::shared_ptr<const Precond> base =
        spec.precond.fixed ? spec.precond.fixed : std::make_shared<IdentityPrecond>();
    if (!spec.precond.tuned)
        return base;
    TunedContext ctx;
    ctx.A = spec.A;
    ctx.apply_B = &apply_B;
    ctx.M = spec.M;
    ctx.lambda = lambda - spec.sigma;
    return tuned_make(std::move(base), x, spec.precond.variant, ctx);
}

// Modified Gram-Schmidt column orthonormalization with a rank check.
void orthonormalize_block(DenseMatrix& Y)
{
    for (std::size_t j = 0; j < Y.ncols; ++j) {
        auto cj = Y.col(j);
        const double orig = norm2(cj);
        for (std::size_t p = 0; p < j; ++p) {
            const Complex h = dot(Y.col(p), cj);
            axpy(-h, Y.col(p), cj);
        }
        const double nrm = norm2(cj);
        if (nrm < 1e-12 * std::max(1.0, orig))
            throw NumericalError("subspace iteration: rank collapse in block column " +
                                 std::to_string(j));
        scale(cj, 1.0 / nrm);
    }
}

}  // namespace

SparseMatrix shifted_operator(const SparseMatrix& A, const SparseMatrix* M, Complex sigma)
{
    if (M)
        return sparse_add(A, -sigma, *M);
    return sparse_add(A, -sigma, sparse_identity(A.nrows));
}

Complex rayleigh_quotient(const SparseMatrix& A, const SparseMatrix* M, const Vector& x)
{
    if (norm2(x) == 0.0)
        throw std::invalid_argument("rayleigh_quotient: zero vector");
    Vector ax = spmv(A, x);
    if (M) {
        Vector mx = spmv(*M, x);
        const double mxn = norm2(mx);
        const double denom = mxn * mxn;
        if (denom == 0.0)
            throw NumericalError("rayleigh_quotient: Mx vanishes");
        return dot(mx, ax) / denom;
    }
    return dot(x, ax) / dot(x, x);
}

OuterTrace inverse_iteration(const ProblemSpec& spec, const EigenBasis* diag)
{
    if (!spec.A)
        throw ConfigError("inverse_iteration: missing matrix");
    const std::size_t n = spec.A->nrows;
    if (spec.y0.size() != n || norm2(spec.y0) == 0.0)
        throw ConfigError("inverse_iteration: initial vector must be nonzero of matching size");

    const SparseMatrix B = shifted_operator(*spec.A, spec.M, spec.sigma);
    const LinearOp apply_B = [&B](const Vector& v) { return spmv(B, v); };
    const std::size_t max_inner = spec.max_inner ? spec.max_inner : n;

    auto normalize = [&](Vector& x) {
        double nrm = spec.M ? norm2(spmv(*spec.M, x)) : norm2(x);
        if (nrm == 0.0)
            throw NumericalError("inverse_iteration: iterate collapsed to zero");
        scale(x, 1.0 / nrm);
        fix_phase(x);
    };

    OuterTrace trace;
    Vector x = spec.y0;
    normalize(x);
    Complex lambda = rayleigh_quotient(*spec.A, spec.M, x);
    double rho_prev = norm2(eig_residual(*spec.A, spec.M, lambda, x));

    for (std::size_t i = 1; i <= spec.max_outer; ++i) {
        OuterStep step;
        step.i = i;
        step.rho_norm = rho_prev;
        step.tau = std::min(spec.delta, spec.delta * rho_prev);

        Vector rhs = spec.M ? spmv(*spec.M, x) : x;
        if (diag)
            step.weights = compute_weights(*diag, x, spec.M);

        auto P = step_precond(spec, apply_B, x, lambda);
        SolveTrace inner = gmres(
            apply_B, [&](const Vector& v) { return P->apply_inverse(v); }, rhs, step.tau,
            max_inner);
        if (norm2(inner.solution) == 0.0)
            throw NumericalError("inverse_iteration: inner solve returned the zero vector");

        x = inner.solution;
        normalize(x);
        lambda = rayleigh_quotient(*spec.A, spec.M, x);
        rho_prev = norm2(eig_residual(*spec.A, spec.M, lambda, x));

        step.lambda = lambda;
        step.inner_iterations = inner.iterations;
        step.inner_converged = inner.converged;
        step.inner = std::move(inner);
        trace.steps.push_back(std::move(step));

        if (rho_prev <= spec.outer_tol) {
            trace.converged = true;
            break;
        }
    }
    trace.x = std::move(x);
    trace.final_rho_norm = rho_prev;
    return trace;
}

OuterTrace subspace_iteration(const ProblemSpec& spec, std::size_t u, const DenseMatrix& Y0,
                              const EigenBasis* diag)
{
    if (!spec.A)
        throw ConfigError("subspace_iteration: missing matrix");
    if (spec.M)
        throw ConfigError("subspace_iteration: mass matrices are not supported in block mode");
    const std::size_t n = spec.A->nrows;
    if (u == 0 || Y0.nrows != n || Y0.ncols != u)
        throw ConfigError("subspace_iteration: block must be n x u with u >= 1");

    const SparseMatrix B = shifted_operator(*spec.A, nullptr, spec.sigma);
    const LinearOp apply_B = [&B](const Vector& v) { return spmv(B, v); };
    const std::size_t max_inner = spec.max_inner ? spec.max_inner : n;

    DenseMatrix Y = Y0;
    orthonormalize_block(Y);

    auto ritz_state = [&](const DenseMatrix& Yc, DenseMatrix& AY, DenseMatrix& H, double& resid,
                          Complex& lam) {
        AY = DenseMatrix(n, u);
        for (std::size_t j = 0; j < u; ++j) {
            Vector yj(Yc.col(j).begin(), Yc.col(j).end());
            Vector ay = spmv(*spec.A, yj);
            std::copy(ay.begin(), ay.end(), AY.col(j).begin());
        }
        H = DenseMatrix(u, u);
        for (std::size_t j = 0; j < u; ++j)
            for (std::size_t p = 0; p < u; ++p)
                H(p, j) = dot(Yc.col(p), AY.col(j));
        DenseMatrix R = AY;
        for (std::size_t j = 0; j < u; ++j)
            for (std::size_t p = 0; p < u; ++p)
                axpy(-H(p, j), Yc.col(p), R.col(j));
        resid = R.frobenius_norm();
        std::vector<Complex> ritz = small_dense_eigenvalues(H);
        lam = ritz.front();
        for (const Complex& r : ritz)
            if (std::abs(r - spec.sigma) < std::abs(lam - spec.sigma))
                lam = r;
    };

    OuterTrace trace;
    DenseMatrix AY, H;
    double rho_prev = 0.0;
    Complex lambda = 0.0;
    ritz_state(Y, AY, H, rho_prev, lambda);

    for (std::size_t i = 1; i <= spec.max_outer; ++i) {
        OuterStep step;
        step.i = i;
        step.rho_norm = rho_prev;
        step.tau = std::min(spec.delta, spec.delta * rho_prev);

        if (diag) {
            DenseMatrix W(n, u);
            for (std::size_t j = 0; j < u; ++j) {
                Vector wj = diag->apply_zinv(Y.col(j));
                std::copy(wj.begin(), wj.end(), W.col(j).begin());
            }
            step.block_w_split = block_weight_split(W, u);
        }

        std::shared_ptr<const Precond> P =
            spec.precond.fixed ? spec.precond.fixed : std::make_shared<IdentityPrecond>();
        if (spec.precond.tuned)
            P = std::make_shared<BlockTunedPrecond>(std::move(P), Y, AY);

        BlockSolveTrace inner = block_gmres(
            apply_B, [&](const Vector& v) { return P->apply_inverse(v); }, Y, step.tau, max_inner);

        Y = inner.solution_block;
        orthonormalize_block(Y);
        ritz_state(Y, AY, H, rho_prev, lambda);

        step.lambda = lambda;
        step.inner_iterations = inner.iterations;
        step.inner_converged = inner.converged;
        step.inner_block = std::move(inner);
        trace.steps.push_back(std::move(step));

        if (rho_prev <= spec.outer_tol) {
            trace.converged = true;
            break;
        }
    }
    trace.X = std::move(Y);
    trace.final_rho_norm = rho_prev;
    return trace;
}

}  // namespace itereig
