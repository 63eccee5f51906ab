#include "nhdyn/schur.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nhdyn {

namespace {

double spectral_scale(const std::vector<cplx>& ev) {
    double m = 0.0;
    for (const auto& l : ev) m = std::max(m, std::abs(l));
    return m > 0.0 ? m : 1.0;
}

// true when a should precede b in growth order
bool grows_faster(cplx a, cplx b, double scale) {
    const double tie = 1e-12 * scale;
    if (std::abs(a.imag() - b.imag()) > tie) return a.imag() > b.imag();
    return a.real() > b.real();
}

void refresh_eigenvalues(SchurDecomposition& sd) {
    const auto n = sd.triangular.rows();
    sd.eigenvalues.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) sd.eigenvalues[static_cast<std::size_t>(i)] = sd.triangular(i, i);
}

// Sort the diagonal by a rank assigned to each current position, using adjacent swaps only.
OrderedSchur bubble_to_ranks(OrderedSchur os, std::vector<int> rank, const Tolerances& tols) {
    const int n = static_cast<int>(rank.size());
    bool moved = true;
    while (moved) {
        moved = false;
        for (int j = 1; j < n; ++j) {
            if (rank[static_cast<std::size_t>(j)] < rank[static_cast<std::size_t>(j - 1)]) {
                os = swap_adjacent(os, j, tols);
                std::swap(rank[static_cast<std::size_t>(j)], rank[static_cast<std::size_t>(j - 1)]);
                moved = true;
            }
        }
    }
    return os;
}

}  // namespace

void check_gaps(const std::vector<cplx>& ev, const Tolerances& tols, double s) {
    const double thr = tols.gap * spectral_scale(ev);
    for (std::size_t i = 0; i < ev.size(); ++i)
        for (std::size_t j = i + 1; j < ev.size(); ++j)
            if (std::abs(ev[i] - ev[j]) < thr) {
                std::ostringstream os;
                os << "near-degenerate eigenvalues " << i << " and " << j << " (|dl| = "
                   << std::abs(ev[i] - ev[j]) << ") at s = " << s;
                throw NearDegenerate(os.str(), static_cast<int>(i), static_cast<int>(j), s);
            }
}

OrderedSchur swap_adjacent(const OrderedSchur& in, int j, const Tolerances& tols) {
    const int n = static_cast<int>(in.base.triangular.rows());
    if (j < 1 || j >= n) throw ValidationError("swap_adjacent: index out of range");
    OrderedSchur os = in;
    CMatrix& A = os.base.triangular;
    CMatrix& U = os.base.unitary;
    const cplx la = A(j - 1, j - 1), lb = A(j, j);
    const double scale = spectral_scale(in.base.eigenvalues);
    if (std::abs(la - lb) < tols.gap * scale) {
        std::ostringstream msg;
        msg << "swap_adjacent: eigenvalues " << j - 1 << " and " << j << " coincide";
        throw NearDegenerate(msg.str(), j - 1, j);
    }
    const cplx C = A(j - 1, j);
    Eigen::Matrix2cd W;
    if (std::abs(C) < tols.swap_zero * A.norm()) {
        W << 0.0, 1.0, 1.0, 0.0;
    } else {
        const cplx z = (lb - la) / C;
        const double f = 1.0 / std::sqrt(1.0 + std::norm(z));
        W << f, -f * std::conj(z), f * z, f;
    }
    A.middleCols(j - 1, 2) = (A.middleCols(j - 1, 2) * W).eval();
    A.middleRows(j - 1, 2) = (W.adjoint() * A.middleRows(j - 1, 2)).eval();
    U.middleCols(j - 1, 2) = (U.middleCols(j - 1, 2) * W).eval();
    A(j, j - 1) = 0.0;
    A(j - 1, j - 1) = lb;
    A(j, j) = la;
    refresh_eigenvalues(os.base);
    os.tag = OrderTag::Custom;
    os.swaps += 1;
    return os;
}

OrderedSchur growth_order(const SchurDecomposition& sd, const Tolerances& tols) {
    check_gaps(sd.eigenvalues, tols);
    const int n = static_cast<int>(sd.eigenvalues.size());
    const double scale = spectral_scale(sd.eigenvalues);
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return grows_faster(sd.eigenvalues[static_cast<std::size_t>(a)],
                            sd.eigenvalues[static_cast<std::size_t>(b)], scale);
    });
    std::vector<int> rank(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) rank[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])] = r;
    OrderedSchur os{sd, OrderTag::Raw, 0, 0};
    os = bubble_to_ranks(os, rank, tols);
    os.tag = OrderTag::Growth;
    return os;
}

OrderedSchur order_like(const SchurDecomposition& sd, const std::vector<cplx>& target,
                        const Tolerances& tols) {
    const std::size_t n = sd.eigenvalues.size();
    if (target.size() != n) throw ValidationError("order_like: target size mismatch");
    check_gaps(sd.eigenvalues, tols);
    // greedy nearest matching of current positions to target slots
    std::vector<int> rank(n, -1);
    std::vector<bool> used(n, false);
    for (std::size_t t = 0; t < n; ++t) {
        double best = INFINITY;
        std::size_t arg = 0;
        for (std::size_t p = 0; p < n; ++p) {
            if (used[p]) continue;
            const double d = std::abs(sd.eigenvalues[p] - target[t]);
            if (d < best) {
                best = d;
                arg = p;
            }
        }
        used[arg] = true;
        rank[arg] = static_cast<int>(t);
    }
    OrderedSchur os{sd, OrderTag::Raw, 0, 0};
    os = bubble_to_ranks(os, rank, tols);
    os.tag = OrderTag::Custom;
    return os;
}

OrderedSchur bring_to_front(const OrderedSchur& in, int j, const Tolerances& tols) {
    const int n = static_cast<int>(in.base.triangular.rows());
    if (j < 1 || j >= n) throw ValidationError("bring_to_front: index out of range");
    OrderedSchur os = in;
    for (int k = j; k >= 1; --k) os = swap_adjacent(os, k, tols);
    os.tag = OrderTag::Front;
    os.front = j;
    return os;
}

namespace {

BasisFamily family_from(const OrderedSchur& ord, const Tolerances& tols) {
    const int n = static_cast<int>(ord.base.triangular.rows());
    BasisFamily f;
    f.chi = ord.base.unitary;
    f.schur = ord.base.triangular;
    f.lambda = ord.base.eigenvalues;
    f.xi.assign(static_cast<std::size_t>(n), CVector());
    f.eta.assign(static_cast<std::size_t>(n), CVector());
    f.c1.assign(static_cast<std::size_t>(n), 0.0);
    f.cj.assign(static_cast<std::size_t>(n), 0.0);
    f.front_unitary.assign(static_cast<std::size_t>(n), CMatrix());
    f.front_schur.assign(static_cast<std::size_t>(n), CMatrix());
    for (int j = 1; j < n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        const OrderedSchur fr = bring_to_front(ord, j, tols);
        f.front_unitary[sj] = fr.base.unitary;
        f.front_schur[sj] = fr.base.triangular;
        f.xi[sj] = fr.base.unitary.col(0);
        f.eta[sj] = fr.base.unitary.col(1);
        f.c1[sj] = f.schur(0, j);
        f.cj[sj] = fr.base.triangular(0, 1);
    }
    return f;
}

}  // namespace

BasisFamily build_basis_family(const CMatrix& H, const Tolerances& tols) {
    return family_from(growth_order(schur_decompose(H, tols.recon, tols), tols), tols);
}

BasisFamily build_basis_family_ordered(const CMatrix& H, const std::vector<cplx>& target,
                                       const Tolerances& tols) {
    return family_from(order_like(schur_decompose(H, tols.recon, tols), target, tols), tols);
}

CMatrix completeness_matrix(const BasisFamily& fam) {
    const int n = fam.dim();
    CMatrix M(n, n);
    M.col(0) = fam.chi.col(0);
    for (int j = 1; j < n; ++j) M.col(j) = fam.eta[static_cast<std::size_t>(j)];
    return M;
}

CompletenessReport completeness_rank(const BasisFamily& fam, double tol) {
    const CMatrix M = completeness_matrix(fam);
    Eigen::JacobiSVD<CMatrix> svd(M);
    const auto& sv = svd.singularValues();
    CompletenessReport r;
    if (sv.size() == 0) return r;
    const double smax = sv(0);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * smax) ++r.rank;
    r.min_singular_value = sv(sv.size() - 1);
    return r;
}

}  // namespace nhdyn
