#include "nhdyn/schur.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nhdyn;

namespace {

const cplx I(0.0, 1.0);

OrderedSchur raw(const CMatrix& H) {
    OrderedSchur os;
    os.base = schur_decompose(H);
    return os;
}

void expect_valid(const OrderedSchur& os, const CMatrix& H, double tol = 1e-11) {
    const auto& U = os.base.unitary;
    const auto& A = os.base.triangular;
    EXPECT_LT(unitarity_error(U), tol);
    EXPECT_LT(lower_triangle_ratio(A), tol);
    EXPECT_LT((U * A * U.adjoint() - H).norm() / H.norm(), tol);
    for (int k = 0; k < A.rows(); ++k) EXPECT_LT(std::abs(A(k, k) - os.base.eigenvalues[static_cast<std::size_t>(k)]), tol);
}

}  // namespace

TEST(Swap, FrozenTwoByTwo) {
    CMatrix H(2, 2);
    H << I, 1.0, 0.0, -I;
    OrderedSchur os;
    os.base.unitary = CMatrix::Identity(2, 2);
    os.base.triangular = H;
    os.base.eigenvalues = {I, -I};
    const auto sw = swap_adjacent(os, 1);
    EXPECT_LT(std::abs(sw.base.triangular(0, 0) + I), 1e-14);
    EXPECT_LT(std::abs(sw.base.triangular(1, 1) - I), 1e-14);
    EXPECT_NEAR(std::abs(sw.base.triangular(0, 1)), 1.0, 1e-14);
    EXPECT_LT(std::abs(sw.base.triangular(1, 0)), 1e-15);
    expect_valid(sw, H);
    EXPECT_EQ(sw.swaps, 1);
}

TEST(Swap, RandomSequencesPreserveInvariants) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d;
    for (int it = 0; it < 30; ++it) {
        const int n = 3 + it % 4;
        CMatrix H(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) H(i, j) = cplx(d(rng), d(rng));
        OrderedSchur os = raw(H);
        std::uniform_int_distribution<int> pick(1, n - 1);
        for (int k = 0; k < 3 * n; ++k) os = swap_adjacent(os, pick(rng));
        expect_valid(os, H, 1e-10);
    }
}

TEST(Swap, IndexOutOfRange) {
    CMatrix H = CMatrix::Identity(3, 3);
    H(0, 0) = 2.0;
    const auto os = raw(H);
    EXPECT_THROW(swap_adjacent(os, 0), ValidationError);
    EXPECT_THROW(swap_adjacent(os, 3), ValidationError);
}

TEST(Ordering, GrowthOrderDescendingImaginaryPart) {
    CMatrix H(3, 3);
    H << -I, 1.0, 0.5, 0.0, 2.0 * I, 0.3, 0.0, 0.0, 1.0;
    const auto os = growth_order(schur_decompose(H));
    EXPECT_NEAR(os.base.eigenvalues[0].imag(), 2.0, 1e-12);
    EXPECT_NEAR(os.base.eigenvalues[1].imag(), 0.0, 1e-12);
    EXPECT_NEAR(os.base.eigenvalues[2].imag(), -1.0, 1e-12);
    expect_valid(os, H);
}

TEST(Ordering, BringToFrontKeepsRemainingOrder) {
    for (int n : {3, 4}) {
        CMatrix H = CMatrix::Zero(n, n);
        for (int k = 0; k < n; ++k) H(k, k) = cplx(k, -k);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) H(i, j) = cplx(0.3 * (i + 1), 0.1 * j);
        const auto g = growth_order(schur_decompose(H));
        for (int j = 1; j < n; ++j) {
            const auto f = bring_to_front(g, j);
            EXPECT_LT(std::abs(f.base.eigenvalues[0] - g.base.eigenvalues[static_cast<std::size_t>(j)]), 1e-12);
            std::size_t r = 1;
            for (int k = 0; k < n; ++k) {
                if (k == j) continue;
                EXPECT_LT(std::abs(f.base.eigenvalues[r++] - g.base.eigenvalues[static_cast<std::size_t>(k)]), 1e-12);
            }
            EXPECT_EQ(f.tag, OrderTag::Front);
            EXPECT_EQ(f.front, j);
            expect_valid(f, H);
        }
    }
}

TEST(Ordering, GapCheckRejectsExceptionalPoint) {
    // Jordan block: the eigenvalues coalesce
    CMatrix H(2, 2);
    H << 0.0, 1.0, 0.0, 0.0;
    EXPECT_THROW(build_basis_family(H), NearDegenerate);
    EXPECT_THROW(check_gaps({1.0, 1.0 + 1e-12}, default_tolerances()), NearDegenerate);
    EXPECT_NO_THROW(check_gaps({1.0, 2.0}, default_tolerances()));
}

TEST(BasisFamily, XiIsEigenvectorAndStructureHolds) {
    CMatrix H(3, 3);
    H << cplx(0.2, 1.0), 0.4, cplx(0, 0.3), 0.5, cplx(-0.5, 0.1), 1.0, cplx(0.1, 0.2), 0.0, cplx(1.0, -0.7);
    const auto f = build_basis_family(H);
    for (int j = 1; j < 3; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        EXPECT_LT(eig_residual(H, f.lambda[sj], f.xi[sj]), 1e-11);
        EXPECT_LT(std::abs(f.xi[sj].dot(f.eta[sj])), 1e-12);
        EXPECT_LT(std::abs(f.xi[sj].dot(H * f.eta[sj]) - f.cj[sj]), 1e-11);
        EXPECT_LT(std::abs(f.eta[sj].dot(H * f.xi[sj])), 1e-11);
    }
    EXPECT_LT(eig_residual(H, f.lambda[0], f.chi.col(0)), 1e-11);
    EXPECT_EQ(completeness_rank(f).rank, 3);
}

TEST(BasisFamily, CompletenessFailsWhenChiOrthogonalToXi) {
    // chi_1 = e1 and xi_2 = e2 are orthogonal, so eta_2 = chi_1
    CMatrix H(3, 3);
    H << 2.0 * I, 0.0, 0.3, 0.0, I, 0.5, 0.0, 0.0, 0.0;
    const auto f = build_basis_family(H);
    EXPECT_LT(std::abs(f.chi.col(0).dot(f.xi[1])), 1e-12);
    EXPECT_LT(completeness_rank(f).rank, 3);
}

TEST(BasisFamily, OrderedFollowsTarget) {
    CMatrix H(2, 2);
    H << 1.0, 0.5, 0.0, 2.0 * I;
    const auto f = build_basis_family_ordered(H, {1.0, 2.0 * I});
    EXPECT_LT(std::abs(f.lambda[0] - 1.0), 1e-12);
    EXPECT_LT(std::abs(f.lambda[1] - 2.0 * I), 1e-12);
}
