#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "itereig/eigenbasis.hpp"
#include "itereig/precond.hpp"
#include "support/oracles.hpp"

using namespace itereig;

namespace {

LinearOp sparse_op(const SparseMatrix& A)
{
    return [&A](const Vector& v) { return spmv(A, v); };
}

Vector random_unit(std::mt19937& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (Complex& x : v)
        x = Complex(u(rng), u(rng));
    scale(v, 1.0 / norm2(v));
    return v;
}

double poly_eval_abs_g(const std::vector<Complex>& mu, double z)
{
    // g(z) = 1 - z p(z) evaluated directly from the coefficients
    Complex p = 0.0;
    double zp = 1.0;
    for (const Complex& m : mu) {
        p += m * zp;
        zp *= z;
    }
    return std::abs(1.0 - z * p);
}

}  // namespace

TEST_CASE("ilu with zero drop tolerance is the exact LU on a tridiagonal")
{
    SparseMatrix A = gen_tridiag(4, -1.0, 2.0, -1.0);
    IluFactors F = ilu_factor(A, 0.0);
    DenseMatrix L = oracles::dense_from_sparse(F.L);
    DenseMatrix U = oracles::dense_from_sparse(F.U);
    DenseMatrix LU = matmul(L, U);
    DenseMatrix D = oracles::dense_from_sparse(A);
    double err = 0.0;
    for (std::size_t k = 0; k < D.data.size(); ++k)
        err += std::norm(LU.data[k] - D.data[k]);
    CHECK(std::sqrt(err) < 1e-12);
}

TEST_CASE("huge drop tolerance reduces ilu to diagonal scaling")
{
    SparseMatrix A = gen_tridiag(5, -1.0, 10.0, -1.0);
    IluFactors F = ilu_factor(A, 10.0);
    CHECK(F.L.nnz() == 5);  // identity
    CHECK(F.U.nnz() == 5);  // diagonal only
    Vector v{1.0, 2.0, 3.0, 4.0, 5.0};
    Vector x = ilu_apply_inverse(F, v);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(std::abs(x[i] - v[i] / 10.0) < 1e-14);
}

TEST_CASE("ilu at theta = 1e-2 beats Jacobi on the generated problem")
{
    ConvDiffProblem p = gen_convdiff(8, 2, -1, -1, 2, -1, -1);
    IluFactors F = ilu_factor(p.A, 1e-2);
    Vector diag(p.A.nrows);
    for (std::size_t i = 0; i < p.A.nrows; ++i)
        for (std::size_t k = p.A.row_offsets[i]; k < p.A.row_offsets[i + 1]; ++k)
            if (p.A.col_indices[k] == i)
                diag[i] = p.A.values[k];
    std::mt19937 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        Vector v = random_unit(rng, p.A.nrows);
        Vector av = spmv(p.A, v);
        Vector ilu = ilu_apply_inverse(F, av);
        Vector jac = av;
        for (std::size_t i = 0; i < jac.size(); ++i)
            jac[i] /= diag[i];
        axpy(-1.0, v, std::span<Complex>(ilu));
        axpy(-1.0, v, std::span<Complex>(jac));
        CHECK(norm2(ilu) < norm2(jac));
    }
}

TEST_CASE("ilu solve inverts the exact factorization")
{
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            t.push_back({i, j, (i == j ? 6.0 : 0.0) + u(rng)});
    SparseMatrix A = sparse_from_triplets(5, 5, std::move(t));
    IluFactors F = ilu_factor(A, 0.0);
    Vector w = random_unit(rng, 5);
    Vector v = spmv(A, w);
    Vector got = ilu_apply_inverse(F, v);
    axpy(-1.0, w, std::span<Complex>(got));
    CHECK(norm2(got) < 1e-12);
}

TEST_CASE("ilu structural and numerical breakdowns are reported")
{
    std::vector<Triplet> t{{0, 1, 1.0}, {1, 0, 1.0}};  // zero diagonal
    SparseMatrix A = sparse_from_triplets(2, 2, std::move(t));
    CHECK_THROWS_AS(ilu_factor(A, 0.0), NumericalError);

    std::vector<Triplet> s{{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}};
    SparseMatrix B = sparse_from_triplets(2, 2, std::move(s));  // singular after elimination
    CHECK_THROWS_AS(ilu_factor(B, 0.0), NumericalError);
}

TEST_CASE("tuned preconditioner defining property and no-op case")
{
    std::mt19937 rng(12);
    const std::size_t n = 8;
    Vector y = random_unit(rng, n);

    SUBCASE("identity target on identity base is a no-op")
    {
        auto P = tuned_make(std::make_shared<IdentityPrecond>(), y, TuneTarget::Identity, {});
        Vector v = random_unit(rng, n);
        Vector got = P->apply_inverse(v);
        axpy(-1.0, v, std::span<Complex>(got));
        CHECK(norm2(got) < 1e-14);
    }
    SUBCASE("lambda target on a basis vector")
    {
        Vector e1(n, 0.0);
        e1[0] = 1.0;
        TunedContext ctx;
        ctx.lambda = 2.0;
        auto P = tuned_make(std::make_shared<IdentityPrecond>(), e1, TuneTarget::Lambda, ctx);
        Vector got = P->apply_inverse(e1);
        CHECK(std::abs(got[0] - 0.5) < 1e-14);
        for (std::size_t i = 1; i < n; ++i)
            CHECK(std::abs(got[i]) < 1e-14);
    }
    SUBCASE("apply_inverse(t) recovers y for every variant")
    {
        ConvDiffProblem p = gen_convdiff(3, 2, -1.5, -0.5, 2, -1, -1);
        SparseMatrix B = sparse_add(p.A, -0.5, sparse_identity(9));
        LinearOp apply_B = sparse_op(B);
        Vector yy = random_unit(rng, 9);
        auto base = std::make_shared<IluPrecond>(ilu_factor(B, 1e-1));
        TunedContext ctx;
        ctx.A = &p.A;
        ctx.apply_B = &apply_B;
        ctx.lambda = 1.7;
        for (TuneTarget v :
             {TuneTarget::Identity, TuneTarget::ATarget, TuneTarget::BTarget, TuneTarget::Lambda}) {
            auto P = tuned_make(base, yy, v, ctx);
            Vector got = P->apply_inverse(P->target());
            axpy(-1.0, yy, std::span<Complex>(got));
            CHECK(norm2(got) < 1e-12);
        }
    }
}

TEST_CASE("tuned preconditioner matches the densely formed rank-one update")
{
    std::mt19937 rng(31);
    const std::size_t n = 12;
    oracles::SyntheticProblem prob = oracles::random_diagonalizable(rng, n, false);
    // dense SPD-ish base preconditioner: P = A^H A + I formed densely
    DenseMatrix P(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            Complex s = (i == j) ? 1.0 : 0.0;
            for (std::size_t l = 0; l < n; ++l)
                s += std::conj(prob.A(l, i)) * prob.A(l, j);
            P(i, j) = s;
        }
    auto plu = std::make_shared<LuFactor>(P);
    struct DensePrecond final : Precond {
        std::shared_ptr<LuFactor> lu;
        Vector apply_inverse(const Vector& v) const override { return lu->solve(v); }
    };
    auto base = std::make_shared<DensePrecond>();
    base->lu = plu;

    Vector y = random_unit(rng, n);
    Vector t = matvec(prob.A, y);
    TunedPrecond tuned(base, y, t);

    // P_i = P + (t - P y) y^H / (y^H y), inverted densely
    Vector py = matvec(P, y);
    DenseMatrix Pi = P;
    const Complex yhy = dot(y, y);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            Pi(i, j) += (t[i] - py[i]) * std::conj(y[j]) / yhy;
    LuFactor pilu(Pi);

    for (int trial = 0; trial < 5; ++trial) {
        Vector v = random_unit(rng, n);
        Vector got = tuned.apply_inverse(v);
        Vector want = pilu.solve(v);
        axpy(-1.0, want, std::span<Complex>(got));
        CHECK(norm2(got) < 1e-10);
        // and the dense operator maps the result back to v
        Vector back = matvec(Pi, tuned.apply_inverse(v));
        axpy(-1.0, v, std::span<Complex>(back));
        CHECK(norm2(back) < 1e-10);
    }
}

TEST_CASE("tuning singularity is detected")
{
    Vector y{1.0, 0.0};
    Vector t{0.0, 1.0};  // base^{-1} t orthogonal to y
    CHECK_THROWS_AS(TunedPrecond(std::make_shared<IdentityPrecond>(), y, t), NumericalError);
}

TEST_CASE("block tuned preconditioner enforces P_i Y = T")
{
    std::mt19937 rng(77);
    const std::size_t n = 10, u = 3;
    oracles::SyntheticProblem prob = oracles::random_diagonalizable(rng, n, false);
    DenseMatrix Y(n, u), T(n, u);
    for (std::size_t j = 0; j < u; ++j) {
        Vector y = random_unit(rng, n);
        std::copy(y.begin(), y.end(), Y.col(j).begin());
        Vector t = matvec(prob.A, y);
        std::copy(t.begin(), t.end(), T.col(j).begin());
    }
    BlockTunedPrecond P(std::make_shared<IdentityPrecond>(), Y, T);
    // P_i^{-1} applied to each target column returns that column of Y
    for (std::size_t j = 0; j < u; ++j) {
        Vector t(T.col(j).begin(), T.col(j).end());
        Vector got = P.apply_inverse(t);
        Vector want(Y.col(j).begin(), Y.col(j).end());
        axpy(-1.0, want, std::span<Complex>(got));
        CHECK(norm2(got) < 1e-10);
    }
}

TEST_CASE("reciprocal chebyshev roots")
{
    SUBCASE("single midpoint node")
    {
        std::vector<Complex> nu = cheb_nu(1.0, 3.0, 0);
        REQUIRE(nu.size() == 1);
        CHECK(std::abs(nu[0] - 0.5) < 1e-14);
    }
    SUBCASE("two nodes on [1,3]")
    {
        std::vector<Complex> nu = cheb_nu(1.0, 3.0, 1);
        CHECK(nu[0].real() == doctest::Approx(2.0 / (4.0 - std::sqrt(2.0))));
        CHECK(nu[1].real() == doctest::Approx(2.0 / (4.0 + std::sqrt(2.0))));
    }
    SUBCASE("degenerate interval")
    {
        std::vector<Complex> nu = cheb_nu(2.0, 2.0, 3);
        for (const Complex& v : nu)
            CHECK(std::abs(v - 0.5) < 1e-14);
    }
    SUBCASE("unguarded interval rejected") { CHECK_THROWS(cheb_nu(-1.0, 3.0, 2)); }
}

TEST_CASE("root-to-coefficient expansion")
{
    SUBCASE("single root")
    {
        std::vector<Complex> mu = nu_to_mu({Complex(0.5)});
        REQUIRE(mu.size() == 1);
        CHECK(std::abs(mu[0] - 0.5) < 1e-14);
    }
    SUBCASE("interval [1,3] degree one")
    {
        std::vector<Complex> mu = nu_to_mu(cheb_nu(1.0, 3.0, 1));
        CHECK(mu[0].real() == doctest::Approx(8.0 / 7.0));
        CHECK(mu[1].real() == doctest::Approx(-2.0 / 7.0));
    }
    SUBCASE("double root at one")
    {
        std::vector<Complex> mu = nu_to_mu({Complex(1.0), Complex(1.0)});
        CHECK(std::abs(mu[0] - 2.0) < 1e-14);
        CHECK(std::abs(mu[1] + 1.0) < 1e-14);
        CHECK(poly_eval_abs_g({mu[0], mu[1]}, 1.0) < 1e-14);
    }
    SUBCASE("product identity at random probes")
    {
        std::vector<Complex> nu = cheb_nu(0.5, 4.0, 5);
        std::vector<Complex> mu = nu_to_mu(nu);
        std::mt19937 rng(8);
        std::uniform_real_distribution<double> u(0.25, 4.5);
        for (int probe = 0; probe < 20; ++probe) {
            const double z = u(rng);
            Complex g = 1.0;
            for (const Complex& root : nu)
                g *= (1.0 - root * z);
            CHECK(poly_eval_abs_g(mu, z) == doctest::Approx(std::abs(g)).epsilon(1e-10));
        }
    }
}

TEST_CASE("interval guard")
{
    CHECK(interval_guard(1.0, 3.0) == std::pair<double, double>(1.0, 3.0));
    CHECK(interval_guard(-3.0, -1.0) == std::pair<double, double>(-3.0, -1.0));
    auto [a, b] = interval_guard(-0.1, 3.0);
    CHECK(a == doctest::Approx(0.1));
    CHECK(b == doctest::Approx(3.2));
    auto [am, bm] = interval_guard(-3.0, 0.1);
    CHECK(am == doctest::Approx(-3.2));
    CHECK(bm == doctest::Approx(-0.1));
    CHECK_THROWS_AS(interval_guard(-3.0, 3.0), NumericalError);
}

TEST_CASE("contour least-squares coefficients")
{
    SUBCASE("point mass")
    {
        std::vector<Complex> mu = contour_ls_mu({{Complex(2.0), Complex(2.0)}}, 0);
        REQUIRE(mu.size() == 1);
        CHECK(std::abs(mu[0] - 0.5) < 1e-12);
    }
    SUBCASE("real segment degree zero matches the moment ratio")
    {
        std::vector<Complex> mu = contour_ls_mu({{Complex(1.0), Complex(3.0)}}, 0);
        CHECK(mu[0].real() == doctest::Approx(6.0 / 13.0).epsilon(1e-12));
        CHECK(mu[0].imag() == 0.0);
    }
    SUBCASE("origin on the contour rejected")
    {
        CHECK_THROWS_AS(contour_ls_mu({{Complex(-1.0), Complex(1.0)}}, 0), NumericalError);
    }
    SUBCASE("perturbing any coefficient cannot decrease the fitted objective")
    {
        std::vector<Segment> segs{{Complex(1.0, 0.5), Complex(3.0, 0.5)},
                                  {Complex(1.0, -0.5), Complex(3.0, -0.5)}};
        const std::size_t d = 3;
        std::vector<Complex> mu = contour_ls_mu(segs, d);
        // quadrature-free surrogate: dense sampling of the segments
        auto objective = [&](const std::vector<Complex>& m) {
            double s = 0.0;
            std::size_t cnt = 0;
            for (const Segment& seg : segs)
                for (int q = 0; q < 200; ++q) {
                    const Complex z = seg.a + (seg.b - seg.a) * ((q + 0.5) / 200.0);
                    Complex p = 0.0, zp = 1.0;
                    for (const Complex& c : m) {
                        p += c * zp;
                        zp *= z;
                    }
                    s += std::norm(1.0 - z * p);
                    ++cnt;
                }
            return s / static_cast<double>(cnt);
        };
        const double best = objective(mu);
        for (std::size_t h = 0; h <= d; ++h)
            for (double delta : {1e-6, -1e-6}) {
                std::vector<Complex> pert = mu;
                pert[h] += delta;
                CHECK(objective(pert) >= best - 1e-12);
            }
    }
}

TEST_CASE("polynomial application")
{
    SUBCASE("constant polynomial is a scaled copy")
    {
        Vector v{1.0, 2.0};
        Vector got = poly_apply_inverse(identity_op, {Complex(1.0)}, v);
        CHECK(std::abs(got[0] - 1.0) < 1e-15);
        CHECK(std::abs(got[1] - 2.0) < 1e-15);
    }
    SUBCASE("p(z) = z applies the operator once")
    {
        DenseMatrix B(2, 2);
        B(0, 0) = 2.0;
        B(1, 1) = 3.0;
        LinearOp op = [&B](const Vector& v) { return matvec(B, v); };
        Vector got = poly_apply_inverse(op, {Complex(0.0), Complex(1.0)}, Vector{1.0, 1.0});
        CHECK(std::abs(got[0] - 2.0) < 1e-14);
        CHECK(std::abs(got[1] - 3.0) < 1e-14);
    }
    SUBCASE("interval endpoints example")
    {
        DenseMatrix B(2, 2);
        B(0, 0) = 1.0;
        B(1, 1) = 3.0;
        LinearOp op = [&B](const Vector& v) { return matvec(B, v); };
        std::vector<Complex> mu{Complex(8.0 / 7.0), Complex(-2.0 / 7.0)};
        Vector pv = poly_apply_inverse(op, mu, Vector{1.0, 1.0});
        CHECK(pv[0].real() == doctest::Approx(6.0 / 7.0));
        CHECK(pv[1].real() == doctest::Approx(2.0 / 7.0));
        Vector bpv = matvec(B, pv);
        CHECK(bpv[0].real() == doctest::Approx(6.0 / 7.0));
        CHECK(bpv[1].real() == doctest::Approx(6.0 / 7.0));
    }
}

TEST_CASE("chebyshev residual polynomial damps the interval")
{
    double prev_max = 1.0;
    for (std::size_t d : {5u, 10u, 15u}) {
        std::vector<Complex> mu = nu_to_mu(cheb_nu(1.0, 3.0, d));
        double worst = 0.0;
        for (int q = 0; q <= 1000; ++q) {
            const double z = 1.0 + 2.0 * q / 1000.0;
            worst = std::max(worst, poly_eval_abs_g(mu, z));
        }
        CHECK(worst < 1.0);
        CHECK(worst < prev_max);
        prev_max = worst;
    }
}

TEST_CASE("polynomial preconditioner setup preserves eigenvectors")
{
    ConvDiffProblem p = gen_convdiff(8, 2, -1.5, -0.5, 3, -2.0, -1.0);
    LinearOp op = sparse_op(p.A);
    for (PolyScheme scheme : {PolyScheme::Chebyshev, PolyScheme::Contour}) {
        PolyCoefficients coeffs = poly_setup(op, p.A.nrows, 8, scheme);
        for (std::size_t j = 0; j < p.basis.dim(); j += 7) {
            Vector z(p.basis.Z().col(j).begin(), p.basis.Z().col(j).end());
            const Complex lam = p.basis.eigenvalues()[j];
            Complex plam = 0.0, zp = 1.0;
            for (const Complex& c : coeffs.mu) {
                plam += c * zp;
                zp *= lam;
            }
            Vector got = op(poly_apply_inverse(op, coeffs.mu, z));
            axpy(-lam * plam, z, std::span<Complex>(got));
            CHECK(norm2(got) < 1e-10);
        }
    }
}
