#include "nhdyn/linalg.hpp"

#include <cmath>
#include <sstream>

namespace nhdyn {

const Tolerances& default_tolerances() {
    static const Tolerances t{};
    return t;
}

namespace {

struct TolField {
    const char* name;
    double Tolerances::*real;
    int Tolerances::*integer;
};

constexpr TolField kTolFields[] = {
    {"unitary", &Tolerances::unitary, nullptr},
    {"triangular", &Tolerances::triangular, nullptr},
    {"recon", &Tolerances::recon, nullptr},
    {"deflation", &Tolerances::deflation, nullptr},
    {"max_iter_factor", nullptr, &Tolerances::max_iter_factor},
    {"gap", &Tolerances::gap, nullptr},
    {"swap_zero", &Tolerances::swap_zero, nullptr},
    {"gauge", &Tolerances::gauge, nullptr},
    {"series", &Tolerances::series, nullptr},
    {"series_terms", nullptr, &Tolerances::series_terms},
    {"max_picard", nullptr, &Tolerances::max_picard},
    {"picard_tol", &Tolerances::picard_tol, nullptr},
    {"multiplier_cond", &Tolerances::multiplier_cond, nullptr},
    {"transition_weight", &Tolerances::transition_weight, nullptr},
    {"transition_window", &Tolerances::transition_window, nullptr},
    {"ratio", &Tolerances::ratio, nullptr},
    {"step_bound", &Tolerances::step_bound, nullptr},
};

}  // namespace

void set_tolerance(Tolerances& t, const std::string& name, double value) {
    if (!std::isfinite(value) || value <= 0.0) throw ValidationError("tolerance '" + name + "' must be positive");
    for (const auto& f : kTolFields) {
        if (name != f.name) continue;
        if (f.real) {
            t.*(f.real) = value;
        } else {
            if (value != std::floor(value)) throw ValidationError("tolerance '" + name + "' must be an integer");
            t.*(f.integer) = static_cast<int>(value);
        }
        return;
    }
    throw ValidationError("unknown tolerance '" + name + "'");
}

std::vector<std::string> tolerance_names() {
    std::vector<std::string> out;
    for (const auto& f : kTolFields) out.emplace_back(f.name);
    return out;
}

cplx complex_sqrt_principal(cplx z) {
    cplx w = std::sqrt(z);
    if (w.real() == 0.0 && w.imag() < 0.0) w = -w;
    return w;
}

double eig_residual(const CMatrix& H, cplx lambda, const CVector& v) {
    const double nv = v.norm();
    if (!(nv > 0.0)) throw ValidationError("eig_residual: zero vector");
    return (H * v - lambda * v).norm() / nv;
}

double unitarity_error(const CMatrix& U) {
    const auto n = U.cols();
    return (U.adjoint() * U - CMatrix::Identity(n, n)).norm();
}

double lower_triangle_ratio(const CMatrix& A) {
    const double fa = A.norm();
    if (fa == 0.0) return 0.0;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        for (Eigen::Index i = j + 1; i < A.rows(); ++i) worst = std::max(worst, std::abs(A(i, j)));
    return worst / fa;
}

namespace {

struct Givens {
    double c;
    cplx s;
};

// G = [[c, s], [-conj(s), c]] maps (a, b) to (r, 0).
Givens make_givens(cplx a, cplx b) {
    const double ab = std::abs(b);
    if (ab == 0.0) return {1.0, 0.0};
    const double aa = std::abs(a);
    if (aa == 0.0) return {0.0, std::conj(b) / ab};
    const double r = std::hypot(aa, ab);
    return {aa / r, (a / aa) * std::conj(b) / r};
}

void rotate_rows(CMatrix& M, Eigen::Index k, const Givens& g, Eigen::Index col_begin) {
    for (Eigen::Index j = col_begin; j < M.cols(); ++j) {
        const cplx x = M(k, j), y = M(k + 1, j);
        M(k, j) = g.c * x + g.s * y;
        M(k + 1, j) = -std::conj(g.s) * x + g.c * y;
    }
}

// M <- M G^dagger on columns k, k+1, rows [0, row_end).
void rotate_cols(CMatrix& M, Eigen::Index k, const Givens& g, Eigen::Index row_end) {
    for (Eigen::Index i = 0; i < row_end; ++i) {
        const cplx x = M(i, k), y = M(i, k + 1);
        M(i, k) = g.c * x + std::conj(g.s) * y;
        M(i, k + 1) = -g.s * x + g.c * y;
    }
}

void hessenberg(CMatrix& H, CMatrix& Q) {
    const Eigen::Index n = H.rows();
    for (Eigen::Index k = 0; k + 2 < n; ++k) {
        CVector x = H.block(k + 1, k, n - k - 1, 1);
        const double xn = x.norm();
        if (xn == 0.0) continue;
        const cplx x0 = x(0);
        const cplx phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : cplx(1.0);
        CVector v = x;
        v(0) += phase * xn;
        const double vn2 = v.squaredNorm();
        if (vn2 == 0.0) continue;
        // P = I - 2 v v^dagger / (v^dagger v) acting on rows/cols k+1..n-1
        auto rows = H.bottomRows(n - k - 1);
        CMatrix tmp = v.adjoint() * rows;
        rows -= (2.0 / vn2) * v * tmp;
        auto cols = H.rightCols(n - k - 1);
        CMatrix tmp2 = cols * v;
        cols -= (2.0 / vn2) * tmp2 * v.adjoint();
        auto qcols = Q.rightCols(n - k - 1);
        CMatrix tmp3 = qcols * v;
        qcols -= (2.0 / vn2) * tmp3 * v.adjoint();
        for (Eigen::Index i = k + 2; i < n; ++i) H(i, k) = 0.0;
    }
}

cplx wilkinson_shift(const CMatrix& H, Eigen::Index hi) {
    const cplx a = H(hi - 1, hi - 1), b = H(hi - 1, hi), c = H(hi, hi - 1), d = H(hi, hi);
    const cplx half = 0.5 * (a - d);
    const cplx disc = std::sqrt(half * half + b * c);
    const cplx mu1 = 0.5 * (a + d) + disc;
    const cplx mu2 = 0.5 * (a + d) - disc;
    return std::abs(mu1 - d) <= std::abs(mu2 - d) ? mu1 : mu2;
}

void qr_sweep(CMatrix& H, CMatrix& Q, Eigen::Index lo, Eigen::Index hi, cplx mu) {
    const Eigen::Index n = H.rows();
    std::vector<Givens> rots;
    rots.reserve(static_cast<std::size_t>(hi - lo));
    for (Eigen::Index i = lo; i <= hi; ++i) H(i, i) -= mu;
    for (Eigen::Index k = lo; k < hi; ++k) {
        const Givens g = make_givens(H(k, k), H(k + 1, k));
        rotate_rows(H, k, g, k);
        H(k + 1, k) = 0.0;
        rots.push_back(g);
    }
    for (Eigen::Index k = lo; k < hi; ++k) {
        const Givens& g = rots[static_cast<std::size_t>(k - lo)];
        rotate_cols(H, k, g, std::min(k + 2, hi + 1));
        rotate_cols(Q, k, g, n);
    }
    for (Eigen::Index i = lo; i <= hi; ++i) H(i, i) += mu;
}

}  // namespace

SchurDecomposition schur_decompose(const CMatrix& H0, double tol, const Tolerances& tols) {
    if (H0.rows() != H0.cols() || H0.rows() == 0)
        throw ValidationError("schur_decompose: matrix must be square and non-empty");
    if (!H0.allFinite()) throw ValidationError("schur_decompose: non-finite entries");

    const Eigen::Index n = H0.rows();
    CMatrix H = H0;
    CMatrix Q = CMatrix::Identity(n, n);
    const double hnorm = H0.norm();
    if (hnorm == 0.0) return {Q, H, std::vector<cplx>(static_cast<std::size_t>(n), 0.0)};

    hessenberg(H, Q);

    const double defl = tols.deflation * hnorm;
    const long max_iter = static_cast<long>(tols.max_iter_factor) * n * n;
    long total = 0;
    int since_deflation = 0;
    Eigen::Index hi = n - 1;
    while (hi > 0) {
        Eigen::Index lo = hi;
        while (lo > 0 && std::abs(H(lo, lo - 1)) > defl) --lo;
        if (lo > 0) H(lo, lo - 1) = 0.0;
        if (lo == hi) {
            --hi;
            since_deflation = 0;
            continue;
        }
        if (++total > max_iter) {
            double resid = 0.0;
            for (Eigen::Index i = 1; i < n; ++i) resid += std::norm(H(i, i - 1));
            std::ostringstream os;
            os << "schur_decompose: no convergence after " << max_iter
               << " sweeps (sub-diagonal norm " << std::sqrt(resid) << ")";
            throw NonConvergence(os.str(), std::sqrt(resid));
        }
        ++since_deflation;
        cplx mu;
        if (since_deflation % 11 == 10) {
            // exceptional shift to break cycles
            mu = H(hi, hi) + 0.75 * std::abs(H(hi, hi - 1)) * cplx(1.0, 1.0);
        } else {
            mu = wilkinson_shift(H, hi);
        }
        qr_sweep(H, Q, lo, hi, mu);
    }
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) H(i, j) = 0.0;

    SchurDecomposition sd{Q, H, {}};
    sd.eigenvalues.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) sd.eigenvalues[static_cast<std::size_t>(i)] = H(i, i);

    const double recon = (Q * H * Q.adjoint() - H0).norm() / hnorm;
    const double unit = unitarity_error(Q);
    if (recon > tol || unit > tol) {
        std::ostringstream os;
        os << "schur_decompose: invariants violated (reconstruction " << recon << ", unitarity "
           << unit << ")";
        throw NumericalError(os.str());
    }
    return sd;
}

}  // namespace nhdyn
