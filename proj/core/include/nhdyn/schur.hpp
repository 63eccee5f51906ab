#pragma once

#include "nhdyn/linalg.hpp"

#include <utility>
#include <vector>

namespace nhdyn {

enum class OrderTag { Raw, Growth, Front, Custom };

struct OrderedSchur {
    SchurDecomposition base;
    OrderTag tag = OrderTag::Raw;
    int front = 0;  // eigenvalue index brought to the front when tag == Front
    int swaps = 0;  // adjacent swaps applied so far
};

// Indices are 0-based: swap_adjacent(os, j) exchanges diagonal entries j-1 and j (1 <= j < n).
OrderedSchur swap_adjacent(const OrderedSchur& os, int j, const Tolerances& tols = default_tolerances());

// Descending Im(lambda), ties (within 1e-12 of the spectral scale) by descending Re.
OrderedSchur growth_order(const SchurDecomposition& sd, const Tolerances& tols = default_tolerances());

// Reorders the diagonal to follow `target` (matched by nearest eigenvalue).
OrderedSchur order_like(const SchurDecomposition& sd, const std::vector<cplx>& target,
                        const Tolerances& tols = default_tolerances());

// From a growth-ordered (or label-ordered) form, moves entry j to position 0 keeping
// the rest in order: (l_j, l_0, ..., l_{j-1}, l_{j+1}, ...).
OrderedSchur bring_to_front(const OrderedSchur& os, int j, const Tolerances& tols = default_tolerances());

// Throws NearDegenerate when two eigenvalues are closer than tols.gap * max|lambda|.
void check_gaps(const std::vector<cplx>& eigenvalues, const Tolerances& tols, double s = 0.0);

// chi: columns of the ordered unitary. xi[j], eta[j] and cj[j] are defined for j = 1..n-1
// (entry 0 is unused). front_unitary[j] is the accumulated unitary whose first two columns
// are xi[j] and eta[j].
struct BasisFamily {
    CMatrix chi;
    CMatrix schur;                 // chi^dagger H chi, upper triangular
    std::vector<cplx> lambda;      // diagonal of `schur`
    std::vector<CVector> xi;
    std::vector<CVector> eta;
    std::vector<cplx> c1;          // C_{1j} = schur(0, j)
    std::vector<cplx> cj;          // C_j = <xi_j|H|eta_j>
    std::vector<CMatrix> front_unitary;
    std::vector<CMatrix> front_schur;

    int dim() const { return static_cast<int>(chi.cols()); }
    // Coupling C_{ij} of the ordered form; zero on and below the diagonal.
    cplx coupling(int i, int j) const { return i < j ? schur(i, j) : cplx(0.0); }
};

BasisFamily build_basis_family(const CMatrix& H, const Tolerances& tols = default_tolerances());
// Same, with the diagonal order following `target` instead of the growth order.
BasisFamily build_basis_family_ordered(const CMatrix& H, const std::vector<cplx>& target,
                                       const Tolerances& tols = default_tolerances());

struct CompletenessReport {
    int rank = 0;
    double min_singular_value = 0.0;
};

// Rank of [chi_1, eta_2, ..., eta_n]; singular values below tol * sigma_max do not count.
CompletenessReport completeness_rank(const BasisFamily& fam, double tol = 1e-10);

// Columns chi_1, eta_2, ..., eta_n as a matrix.
CMatrix completeness_matrix(const BasisFamily& fam);

}  // namespace nhdyn
