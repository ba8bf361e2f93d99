#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "itereig/krylov.hpp"
#include "itereig/sparse.hpp"
#include "support/oracles.hpp"

using namespace itereig;

namespace {

LinearOp dense_op(const DenseMatrix& A)
{
    return [&A](const Vector& v) { return matvec(A, v); };
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

}  // namespace

TEST_CASE("gmres converges immediately on the identity")
{
    std::mt19937 rng(1);
    Vector rhs = random_unit(rng, 8);
    SolveTrace t = gmres(identity_op, identity_op, rhs, 1e-12, 8);
    CHECK(t.converged);
    CHECK(t.iterations == 1);
    CHECK(t.residual_norms.back() < 1e-12);
}

TEST_CASE("gmres on diag(1,2) reproduces the hand-computed residuals")
{
    DenseMatrix B(2, 2);
    B(0, 0) = 1.0;
    B(1, 1) = 2.0;
    const double s = 1.0 / std::sqrt(2.0);
    SolveTrace t = gmres(dense_op(B), identity_op, Vector{s, s}, 1e-14, 2);
    REQUIRE(t.residual_norms.size() == 3);
    CHECK(t.residual_norms[1] == doctest::Approx(0.31623).epsilon(1e-4));
    CHECK(t.residual_norms[2] < 1e-13);
}

TEST_CASE("gmres terminates in one step on an exact eigenvector")
{
    DenseMatrix B(3, 3);
    B(0, 0) = 2.0;
    B(1, 1) = 3.0;
    B(2, 2) = 4.0;
    Vector rhs{0.0, 1.0, 0.0};
    SolveTrace t = gmres(dense_op(B), identity_op, rhs, 1e-13, 3);
    CHECK(t.iterations == 1);
    CHECK(t.residual_norms.back() < 1e-13);
}

TEST_CASE("gmres matches the brute-force Krylov least-squares oracle")
{
    std::mt19937 rng(42);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t n = 5 + 3 * trial;
        oracles::SyntheticProblem p = oracles::random_diagonalizable(rng, n, trial % 2 == 1);
        Vector rhs = random_unit(rng, n);
        SolveTrace t = gmres(dense_op(p.A), identity_op, rhs, 1e-14, n);
        for (std::size_t k = 0; k < t.residual_norms.size(); ++k) {
            const double oracle = oracles::krylov_ls_residual(dense_op(p.A), identity_op, rhs, k);
            // relative above 1e-6, absolute (1e-14) once both sit in the
            // roundoff regime of the explicit-basis oracle
            const double tol =
                1e-8 * std::max({oracle, t.residual_norms[k], 1e-6});
            CHECK(std::abs(t.residual_norms[k] - oracle) <= tol);
        }
    }
}

TEST_CASE("gmres residuals never increase")
{
    std::mt19937 rng(9);
    oracles::SyntheticProblem p = oracles::random_diagonalizable(rng, 12, true);
    SolveTrace t = gmres(dense_op(p.A), identity_op, random_unit(rng, 12), 1e-12, 12);
    for (std::size_t k = 1; k < t.residual_norms.size(); ++k)
        CHECK(t.residual_norms[k] <= t.residual_norms[k - 1] + 1e-13);
    CHECK(t.residual_norms.size() == t.iterations + 1);
}

TEST_CASE("right preconditioning with the exact inverse converges in one step")
{
    std::mt19937 rng(4);
    oracles::SyntheticProblem p = oracles::random_diagonalizable(rng, 10, false);
    DenseMatrix Bc(p.A);
    auto lu = std::make_shared<LuFactor>(Bc);
    LinearOp pinv = [lu](const Vector& v) { return lu->solve(v); };
    SolveTrace t = gmres(dense_op(p.A), pinv, random_unit(rng, 10), 1e-10, 10);
    CHECK(t.converged);
    CHECK(t.iterations == 1);
}

TEST_CASE("reported solution reproduces the final residual")
{
    std::mt19937 rng(15);
    oracles::SyntheticProblem p = oracles::random_diagonalizable(rng, 9, true);
    Vector rhs = random_unit(rng, 9);
    SolveTrace t = gmres(dense_op(p.A), identity_op, rhs, 1e-8, 9);
    Vector r = matvec(p.A, t.solution);
    for (std::size_t i = 0; i < 9; ++i)
        r[i] = rhs[i] - r[i];
    CHECK(norm2(r) == doctest::Approx(t.residual_norms.back()).epsilon(1e-8));
}

TEST_CASE("block gmres with u = 1 reduces to gmres exactly")
{
    std::mt19937 rng(21);
    oracles::SyntheticProblem p = oracles::random_diagonalizable(rng, 14, false);
    Vector rhs = random_unit(rng, 14);
    DenseMatrix Y(14, 1);
    std::copy(rhs.begin(), rhs.end(), Y.col(0).begin());
    SolveTrace t = gmres(dense_op(p.A), identity_op, rhs, 1e-9, 14);
    BlockSolveTrace bt = block_gmres(dense_op(p.A), identity_op, Y, 1e-9, 14);
    REQUIRE(bt.residual_fro_norms.size() == t.residual_norms.size());
    for (std::size_t k = 0; k < t.residual_norms.size(); ++k)
        CHECK(bt.residual_fro_norms[k] == t.residual_norms[k]);
}

TEST_CASE("block gmres solves eigenvector right-hand sides in one iteration")
{
    DenseMatrix B(2, 2);
    B(0, 0) = 1.0;
    B(1, 1) = 2.0;
    BlockSolveTrace t = block_gmres(dense_op(B), identity_op, DenseMatrix::identity(2), 1e-13, 4);
    CHECK(t.iterations == 1);
    CHECK(t.residual_fro_norms.back() < 1e-13);
    CHECK(std::abs(t.solution_block(0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(t.solution_block(1, 1) - 0.5) < 1e-12);
}

TEST_CASE("block residual per column never exceeds single-vector gmres")
{
    std::mt19937 rng(33);
    oracles::SyntheticProblem p = oracles::random_diagonalizable(rng, 12, false);
    DenseMatrix Y(12, 2);
    Vector y0 = random_unit(rng, 12), y1 = random_unit(rng, 12);
    std::copy(y0.begin(), y0.end(), Y.col(0).begin());
    std::copy(y1.begin(), y1.end(), Y.col(1).begin());
    BlockSolveTrace bt = block_gmres(dense_op(p.A), identity_op, Y, 1e-13, 12);
    SolveTrace t0 = gmres(dense_op(p.A), identity_op, y0, 1e-13, 12);
    // the block search space contains the single-vector space for each column
    DenseMatrix X = bt.solution_block;
    Vector r0 = matvec(p.A, Vector(X.col(0).begin(), X.col(0).end()));
    for (std::size_t i = 0; i < 12; ++i)
        r0[i] = y0[i] - r0[i];
    CHECK(norm2(r0) <= t0.residual_norms.back() + 1e-10);
}

TEST_CASE("arnoldi ritz values")
{
    SUBCASE("full space is exact")
    {
        DenseMatrix B(3, 3);
        B(0, 0) = 1.0;
        B(1, 1) = 2.0;
        B(2, 2) = 3.0;
        Vector seed{1.0, 1.0, 1.0};
        std::vector<Complex> ritz = arnoldi_ritz(dense_op(B), 3, 3, seed);
        std::sort(ritz.begin(), ritz.end(),
                  [](Complex a, Complex b) { return a.real() < b.real(); });
        CHECK(std::abs(ritz[0] - 1.0) < 1e-8);
        CHECK(std::abs(ritz[1] - 2.0) < 1e-8);
        CHECK(std::abs(ritz[2] - 3.0) < 1e-8);
    }
    SUBCASE("m = 1 is the Rayleigh quotient")
    {
        DenseMatrix B(2, 2);
        B(0, 0) = 1.0;
        B(1, 1) = 3.0;
        Vector seed{1.0, 1.0};
        std::vector<Complex> ritz = arnoldi_ritz(dense_op(B), 2, 1, seed);
        REQUIRE(ritz.size() == 1);
        CHECK(std::abs(ritz[0] - 2.0) < 1e-12);
    }
    SUBCASE("ritz values stay inside the analytic spectral interval")
    {
        SparseMatrix T = gen_tridiag(10, -1.0, 2.0, -1.0);
        LinearOp op = [&T](const Vector& v) { return spmv(T, v); };
        Vector seed(10, 1.0);
        std::vector<Complex> ritz = arnoldi_ritz(op, 10, 4, seed);
        const double lo = 2.0 - 2.0 * std::cos(std::acos(-1.0) / 11.0);
        const double hi = 2.0 + 2.0 * std::cos(std::acos(-1.0) / 11.0);
        for (const Complex& r : ritz) {
            CHECK(r.real() >= lo - 1e-10);
            CHECK(r.real() <= hi + 1e-10);
            CHECK(std::abs(r.imag()) < 1e-10);
        }
    }
    SUBCASE("subspace size cap enforced")
    {
        CHECK_THROWS_AS(arnoldi_ritz(identity_op, 100, 51, Vector(100, 1.0)), ConfigError);
    }
}

TEST_CASE("small dense eigenvalues agree with the independent oracle")
{
    std::mt19937 rng(55);
    for (int trial = 0; trial < 4; ++trial) {
        oracles::SyntheticProblem p = oracles::random_diagonalizable(rng, 8, trial % 2 == 1);
        std::vector<Complex> got = small_dense_eigenvalues(p.A);
        std::vector<Complex> want = p.eigenvalues;
        auto key = [](Complex a, Complex b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        };
        std::sort(got.begin(), got.end(), key);
        std::sort(want.begin(), want.end(), key);
        REQUIRE(got.size() == want.size());
        for (std::size_t j = 0; j < got.size(); ++j)
            CHECK(std::abs(got[j] - want[j]) < 1e-7);
    }
}
