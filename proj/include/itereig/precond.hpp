#pragma once

#include <memory>

#include "itereig/krylov.hpp"
#include "itereig/sparse.hpp"
#include "itereig/types.hpp"

namespace itereig {

// Right preconditioner interface: apply_inverse realizes v -> P^{-1} v.
class Precond {
  public:
    virtual ~Precond() = default;
    virtual Vector apply_inverse(const Vector& v) const = 0;
};

class IdentityPrecond final : public Precond {
  public:
    Vector apply_inverse(const Vector& v) const override { return v; }
};

struct IluFactors {
    SparseMatrix L;  // unit lower triangular, unit diagonal stored
    SparseMatrix U;  // upper triangular, diagonal first kept entry per row
    double droptol = 0;
};

// Row-wise ILUT-style factorization. An off-diagonal entry is dropped when
// its magnitude falls below droptol times the 2-norm of the original row;
// diagonal pivots are never dropped and there is no fill cap.
IluFactors ilu_factor(const SparseMatrix& A, double droptol);

// Forward substitution on L, back substitution on U.
Vector ilu_apply_inverse(const IluFactors& F, std::span<const Complex> v);

class IluPrecond final : public Precond {
  public:
    explicit IluPrecond(IluFactors f) : f_(std::move(f)) {}
    Vector apply_inverse(const Vector& v) const override { return ilu_apply_inverse(f_, v); }
    const IluFactors& factors() const { return f_; }

  private:
    IluFactors f_;
};

enum class TuneTarget {
    Identity,  // P_i y = y
    ATarget,   // P_i y = A y
    BTarget,   // P_i y = B y
    Lambda,    // P_i y = lambda^(i) y
    MTarget,   // P_i y = M y (generalized eigenproblem tuning)
};

// Rank-one tuned modification P_i = P + (t - P y) y^H / (y^H y) of a base
// preconditioner, applied through the Sherman-Morrison formula. Exactly one
// base inverse application (P^{-1} t) is consumed at construction; each
// apply_inverse costs one further base application.
class TunedPrecond final : public Precond {
  public:
    TunedPrecond(std::shared_ptr<const Precond> base, Vector y, Vector t);
    Vector apply_inverse(const Vector& v) const override;

    const Vector& target() const { return t_; }
    const Vector& direction() const { return y_; }

  private:
    std::shared_ptr<const Precond> base_;
    Vector y_;
    Vector t_;
    Vector base_inv_t_;
    Complex denom_;
};

struct TunedContext {
    const SparseMatrix* A = nullptr;  // needed for ATarget
    const LinearOp* apply_B = nullptr;  // needed for BTarget
    const SparseMatrix* M = nullptr;  // needed for MTarget
    Complex lambda = 0.0;  // needed for Lambda (lambda = gamma^(i) - sigma)
};

std::shared_ptr<TunedPrecond> tuned_make(std::shared_ptr<const Precond> base, const Vector& y,
                                         TuneTarget variant, const TunedContext& ctx);

// Block tuning P_i = P + (T - P Y)(Y^H Y)^{-1} Y^H enforcing P_i Y = T,
// applied through Sherman-Morrison-Woodbury with a u x u dense solve.
class BlockTunedPrecond final : public Precond {
  public:
    BlockTunedPrecond(std::shared_ptr<const Precond> base, DenseMatrix Y, DenseMatrix T);
    Vector apply_inverse(const Vector& v) const override;

  private:
    std::shared_ptr<const Precond> base_;
    DenseMatrix Y_;
    DenseMatrix correction_;  // columns of P^{-1}T - Y(Y^H Y)^{-1}... cached update directions
    std::unique_ptr<LuFactor> small_;
};

// --- residual-polynomial preconditioners -----------------------------------

struct PolyCoefficients {
    std::vector<Complex> mu;  // p(z) = sum mu_h z^h
    std::vector<Complex> nu;  // roots of g when generated from roots, else empty
    std::string provenance;
};

// Reciprocal Chebyshev nodes on [a, b], 0 < a <= b.
std::vector<Complex> cheb_nu(double a, double b, std::size_t d);

// Expand g(z) = prod(1 - nu_h z) = 1 - z p(z) into the coefficients of p.
std::vector<Complex> nu_to_mu(const std::vector<Complex>& nu);

// Nudge an interval whose left end slightly crosses the origin back onto one
// side of the axis; errors out when the origin sits deep inside.
std::pair<double, double> interval_guard(double a, double b);

struct Segment {
    Complex a;
    Complex b;
};

// Least-squares residual polynomial over a piecewise linear contour in the
// inner product <f,g> = (1/L) int_Gamma f conj(g) |dz|, by 32-point
// Gauss-Legendre quadrature per segment.
std::vector<Complex> contour_ls_mu(const std::vector<Segment>& segments, std::size_t d);

// Horner evaluation of p(B) v; exactly deg(p) operator applications.
Vector poly_apply_inverse(const LinearOp& apply_B, const std::vector<Complex>& mu,
                          const Vector& v);

// Root-form evaluation via p_{t+1} = p_t + nu_{t+1} (1 - z p_t). The expanded
// monomial coefficients cancel heavily at moderate degrees, so this form is
// preferred whenever the roots are known.
Vector poly_apply_inverse_roots(const LinearOp& apply_B, const std::vector<Complex>& nu,
                                const Vector& v);

class PolyPrecond final : public Precond {
  public:
    PolyPrecond(LinearOp apply_B, PolyCoefficients coeffs)
        : apply_B_(std::move(apply_B)), coeffs_(std::move(coeffs))
    {
    }
    Vector apply_inverse(const Vector& v) const override
    {
        if (!coeffs_.nu.empty())
            return poly_apply_inverse_roots(apply_B_, coeffs_.nu, v);
        return poly_apply_inverse(apply_B_, coeffs_.mu, v);
    }
    const PolyCoefficients& coefficients() const { return coeffs_; }

  private:
    LinearOp apply_B_;
    PolyCoefficients coeffs_;
};

enum class PolyScheme { Chebyshev, Contour };

// Builds polynomial coefficients from Arnoldi Ritz values of B (m = 20 from
// the all-ones seed unless an interval override is given). Real-ish spectra
// use the Chebyshev nodes, complex spectra a convex-hull contour.
PolyCoefficients poly_setup(const LinearOp& apply_B, std::size_t n, std::size_t degree,
                            PolyScheme scheme, std::pair<double, double>* interval_override = nullptr);

}  // namespace itereig
