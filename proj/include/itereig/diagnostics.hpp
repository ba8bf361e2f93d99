#pragma once

#include <optional>
#include <utility>

#include "itereig/eigenbasis.hpp"
#include "itereig/sparse.hpp"
#include "itereig/types.hpp"

namespace itereig {

// Snapshot of the right-hand side expressed in the eigenvector basis. The
// basis is expected to carry the eigenvalues of the shifted operator, target
// (smallest magnitude) first.
struct WeightRecord {
    Vector w;            // Z^{-1} y / ||y||
    Complex w1 = 0.0;    // first (target) component
    double w2_norm = 0;  // norm of the trailing components
    Vector wt;           // tilted weights w_j (1 - lambda_j/lambda_1), j >= 2
    double wt_norm = 0;
    std::optional<Vector> f;  // generalized weights Z^{-1} M y
    std::optional<double> ft_norm;
};

struct BoundReport {
    std::size_t k = 0;
    double bound_25 = 0;
    double bound_26a = 0;
    double bound_26k1 = 0;  // populated at k = 1 only
    double disk_C = 0;
    double disk_S = 0;
    double bound_26b_disk = 0;
    double iter_lower = 0;
};

// Weights of y in the basis; errors when the target eigenvalue is zero (the
// shift coincides with an eigenvalue and the tilt ratios are undefined).
WeightRecord compute_weights(const EigenBasis& basis, const Vector& y,
                             const SparseMatrix* M = nullptr);

// ||Z||_2 times the minimum over monic-at-zero polynomials of degree k of the
// weighted eigenvalue sum (sum_j |w_j q(lambda_j)|^2)^{1/2}.
double bound_25(const EigenBasis& basis, const WeightRecord& w, std::size_t k);

// Same minimization with tilted weights over the non-target eigenvalues and
// degree k - 1; k = 1 reduces to ||Z||_2 ||wt||_2.
double bound_26a(const EigenBasis& basis, const WeightRecord& w, std::size_t k);

struct DiskEnvelope {
    Complex center = 0.0;
    double radius = 0;
    double C = 0;
    double S = 1.0;
    bool valid = false;
};

// Disk enclosure of the non-target eigenvalues: the envelope S (1/C)^{k-1}
// with C = |c|/r is certified by q(z) = (1 - z/c)^{k-1}. Invalid (C = 1) when
// the disk contains the origin; a single point gives C = infinity.
DiskEnvelope disk_envelope(std::span<const Complex> lambda_tail);

// Smallest k consistent with the envelope: 1 + (log S + log(z_norm wt_norm /
// tau)) / log C. The caller takes the ceiling.
double iter_lower_bound(double C, double S, double z_norm, double wt_norm, double tau);

// First-step decrease constants: C1 = max_{j>=2} |gamma_1 - gamma_j| /
// |gamma_1 - sigma| and C2 = ||Z||_2 C1, predicting ||r_1|| <= C2 ||w2||.
std::pair<double, double> initial_decrease_constants(const EigenBasis& basis, Complex sigma);

// Block variant: stacks the u weight columns into one least-squares problem
// sharing a single polynomial.
double block_bound(const EigenBasis& basis, const DenseMatrix& W, std::size_t k);

// Frobenius norms of the top u x u and bottom (n - u) x u blocks of W.
std::pair<double, double> block_weight_split(const DenseMatrix& W, std::size_t u);

BoundReport make_bound_report(const EigenBasis& basis, const WeightRecord& w, std::size_t k,
                              double tau);

}  // namespace itereig
