#include "nhdyn/linalg.hpp"
#include "nhdyn/schur.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace nhdyn;

namespace {

const cplx I(0.0, 1.0);

std::vector<cplx> sorted_by_im(std::vector<cplx> v) {
    std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return a.imag() > b.imag(); });
    return v;
}

CMatrix random_matrix(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> d;
    CMatrix A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cplx(d(rng), d(rng));
    return A;
}

}  // namespace

TEST(ComplexSqrt, FrozenValues) {
    const cplx w = complex_sqrt_principal(cplx(1.0, -4.0));
    EXPECT_NEAR(w.real(), 1.6004851804402408, 1e-15);
    EXPECT_NEAR(w.imag(), -1.2496210676876532, 1e-15);
    const cplx n4 = complex_sqrt_principal(cplx(-4.0, 0.0));
    EXPECT_NEAR(n4.real(), 0.0, 1e-15);
    EXPECT_NEAR(n4.imag(), 2.0, 1e-15);
}

TEST(ComplexSqrt, BranchCutConvention) {
    // -1 approached from below still maps to +i under the tie-break
    const cplx w = complex_sqrt_principal(cplx(-1.0, -0.0));
    EXPECT_NEAR(w.imag(), 1.0, 1e-15);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int k = 0; k < 500; ++k) {
        const cplx z(u(rng), u(rng));
        const cplx r = complex_sqrt_principal(z);
        EXPECT_GE(r.real(), 0.0);
        EXPECT_LT(std::abs(r * r - z), 1e-13 * std::max(1.0, std::abs(z)));
    }
}

TEST(Schur, FrozenEigenvalues3x3) {
    CMatrix H(3, 3);
    H << cplx(1, 2), 0.5, cplx(0, -1),
         cplx(-0.3, 0.2), -1.0, 2.0,
         0.7, cplx(0, 0.4), cplx(0.2, -1.5);
    const auto sd = schur_decompose(H);
    const auto ev = sorted_by_im(sd.eigenvalues);
    const cplx want[3] = {{0.74597152439265888773, 1.9978473258837488982},
                          {-0.27127995049328532362, -0.52269972063440504603},
                          {-0.27469157389937355301, -0.9751476052493438522}};
    for (int k = 0; k < 3; ++k) EXPECT_LT(std::abs(ev[static_cast<std::size_t>(k)] - want[k]), 1e-12);
}

TEST(Schur, CompanionMatrixRoots) {
    // x^4 - (1+i) x^3 + 2 x - 3i
    CMatrix C = CMatrix::Zero(4, 4);
    C(0, 0) = cplx(1, 1);
    C(0, 1) = 0.0;
    C(0, 2) = -2.0;
    C(0, 3) = 3.0 * I;
    C(1, 0) = C(2, 1) = C(3, 2) = 1.0;
    const auto ev = sorted_by_im(schur_decompose(C).eigenvalues);
    const cplx want[4] = {{1.3337302982582177006, 1.2734719282471112418},
                          {0.0, 1.0},
                          {-1.1695558801049459823, -0.18247516876514724783},
                          {0.83582558184672828176, -1.090996759481963994}};
    for (int k = 0; k < 4; ++k) EXPECT_LT(std::abs(ev[static_cast<std::size_t>(k)] - want[k]), 1e-11);
}

TEST(Schur, AgreesWithEigenSolverOnRandomMatrices) {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 40; ++it) {
        const int n = 2 + it % 6;
        const CMatrix H = random_matrix(rng, n);
        const auto sd = schur_decompose(H);
        Eigen::ComplexEigenSolver<CMatrix> es(H);
        auto a = sorted_by_im(sd.eigenvalues);
        std::vector<cplx> b(es.eigenvalues().data(), es.eigenvalues().data() + n);
        b = sorted_by_im(b);
        for (int k = 0; k < n; ++k)
            EXPECT_LT(std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]), 1e-9) << "n=" << n;
        EXPECT_LT(unitarity_error(sd.unitary), 1e-12);
        EXPECT_LT(lower_triangle_ratio(sd.triangular), 1e-12);
        EXPECT_LT((sd.unitary * sd.triangular * sd.unitary.adjoint() - H).norm() / H.norm(), 1e-12);
    }
}

TEST(Schur, DiagonalAndTriangularInputs) {
    CMatrix D = CMatrix::Zero(3, 3);
    D(0, 0) = 1.0;
    D(1, 1) = I;
    D(2, 2) = -2.0;
    const auto sd = schur_decompose(D);
    EXPECT_LT(unitarity_error(sd.unitary), 1e-14);
    EXPECT_LT((sd.unitary * sd.triangular * sd.unitary.adjoint() - D).norm(), 1e-14);
}

TEST(Schur, RejectsBadInput) {
    EXPECT_THROW(schur_decompose(CMatrix(2, 3)), ValidationError);
    EXPECT_THROW(schur_decompose(CMatrix(0, 0)), ValidationError);
    CMatrix H = CMatrix::Identity(2, 2);
    H(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(schur_decompose(H), ValidationError);
}

TEST(EigResidual, ExactEigenvectorHasZeroResidual) {
    CMatrix H(2, 2);
    H << 2.0, 1.0, 0.0, -1.0;
    CVector v(2);
    v << 1.0, 0.0;
    EXPECT_LT(eig_residual(H, 2.0, v), 1e-15);
    EXPECT_THROW(eig_residual(H, 2.0, CVector::Zero(2)), ValidationError);
}

TEST(Tolerances, SetByName) {
    Tolerances t;
    set_tolerance(t, "series", 1e-5);
    EXPECT_EQ(t.series, 1e-5);
    set_tolerance(t, "max_picard", 7);
    EXPECT_EQ(t.max_picard, 7);
    EXPECT_THROW(set_tolerance(t, "max_picard", 7.5), ValidationError);
    EXPECT_THROW(set_tolerance(t, "series", -1.0), ValidationError);
    EXPECT_THROW(set_tolerance(t, "nope", 1.0), ValidationError);
    const auto names = tolerance_names();
    EXPECT_NE(std::find(names.begin(), names.end(), "gap"), names.end());
    for (const auto& n : names) EXPECT_NO_THROW(set_tolerance(t, n, 3.0)) << n;
}
