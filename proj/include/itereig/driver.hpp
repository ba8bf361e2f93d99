#pragma once

#include <memory>
#include <optional>

#include "itereig/diagnostics.hpp"
#include "itereig/eigenbasis.hpp"
#include "itereig/krylov.hpp"
#include "itereig/precond.hpp"
#include "itereig/sparse.hpp"
#include "itereig/types.hpp"

namespace itereig {

// Preconditioning regime of the inner solves. `fixed` (identity when null) is
// built once before the outer loop; when `tuned` is set a rank-one (or block)
// modification of `fixed` is rebuilt from the current iterate at every outer
// step.
struct PrecondRegime {
    std::shared_ptr<const Precond> fixed;
    bool tuned = false;
    TuneTarget variant = TuneTarget::ATarget;
};

struct ProblemSpec {
    const SparseMatrix* A = nullptr;
    const SparseMatrix* M = nullptr;  // identity when absent
    Complex sigma = 0.0;
    Vector y0;
    double delta = 0.1;
    std::size_t max_outer = 30;
    double outer_tol = 1e-10;
    std::size_t max_inner = 0;  // 0 = problem dimension
    PrecondRegime precond;
};

struct OuterStep {
    std::size_t i = 0;           // 1-based outer index
    Complex lambda = 0.0;        // eigenvalue estimate after this step
    double rho_norm = 0;         // eigenvalue residual of the previous iterate
    double tau = 0;              // inner tolerance min{delta, delta*rho_norm}
    std::size_t inner_iterations = 0;
    bool inner_converged = true;
    std::optional<WeightRecord> weights;
    SolveTrace inner;                 // single-vector residual history
    BlockSolveTrace inner_block;      // block residual history
    std::optional<std::pair<double, double>> block_w_split;  // (|W1|_F, |W2|_F)
};

struct OuterTrace {
    std::vector<OuterStep> steps;
    bool converged = false;
    Vector x;        // final normalized eigenvector approximation
    DenseMatrix X;   // final orthonormal block (subspace iteration)
    double final_rho_norm = 0;

    std::size_t inner_total() const
    {
        std::size_t s = 0;
        for (const OuterStep& st : steps)
            s += st.inner_iterations;
        return s;
    }
};

// B = A - sigma*I, or A - sigma*M when a mass matrix is given.
SparseMatrix shifted_operator(const SparseMatrix& A, const SparseMatrix* M, Complex sigma);

// x^H A x / x^H x, or (x^H M^H A x)/||Mx||^2 with a mass matrix.
Complex rayleigh_quotient(const SparseMatrix& A, const SparseMatrix* M, const Vector& x);

// Shift-invert outer iteration with inexact inner solves: each step solves
// B y = x_i by preconditioned GMRES to tolerance min{delta, delta*||rho||} and
// normalizes. When `diag` is given (the eigenbasis of B, target first) a
// weight snapshot is recorded per step.
OuterTrace inverse_iteration(const ProblemSpec& spec, const EigenBasis* diag = nullptr);

// Block analogue iterating an n x u subspace with block GMRES inner solves
// and block Rayleigh-Ritz eigenvalue extraction; the Frobenius norm of the
// Ritz residual drives the tolerance schedule and stopping.
OuterTrace subspace_iteration(const ProblemSpec& spec, std::size_t u, const DenseMatrix& Y0,
                              const EigenBasis* diag = nullptr);

}  // namespace itereig
