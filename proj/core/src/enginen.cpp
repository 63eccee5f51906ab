#include "branch.hpp"
#include "nhdyn/quadrature.hpp"
#include "nhdyn/riccati.hpp"

#include <Eigen/LU>

#include <cmath>

namespace nhdyn {

namespace {

using Series = std::vector<cplx>;
using Table = std::vector<std::vector<Series>>;

bool finite(const Series& v) {
    for (const auto& x : v)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

// An orthonormal moving frame u_1..u_n with upper-triangular H, slot eigenvalues and
// calC_kl = A_kl - T S_kl. The component starts on u_pivot.
struct Frame {
    int pivot = 0;
    std::vector<Series> lambda;
    Table cal;
    std::vector<CMatrix> U;  // phase-aligned frame, front frames only
};

Frame grid_frame(const TrajectoryGrid& g) {
    const int n = g.dim;
    const auto N = static_cast<std::size_t>(n);
    Frame f;
    f.lambda.resize(N);
    f.cal.assign(N, std::vector<Series>(N));
    for (int j = 0; j < n; ++j) f.lambda[static_cast<std::size_t>(j)] = g.lambda(j);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            if (j == k) continue;
            Series v = berry_connection(g, {Family::Chi, j}, {Family::Chi, k});
            const auto cjk = g.coupling(j, k);
            for (std::size_t i = 0; i < g.size(); ++i) v[i] -= g.T * cjk[i];
            f.cal[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = std::move(v);
        }
    return f;
}

// Schur frame with lambda_j in front; eta_j sits in the lambda_1 slot, which becomes the pivot.
Frame front_frame(const TrajectoryGrid& g, int j) {
    const int n = g.dim;
    const auto N = static_cast<std::size_t>(n);
    const std::size_t m = g.size();
    const auto sj = static_cast<std::size_t>(j);
    std::vector<CMatrix> U(m);
    for (std::size_t i = 0; i < m; ++i) U[i] = g.basis[i].front_unitary[sj];
    // gauge_fix only aligns the first two columns
    for (std::size_t i = 1; i < m; ++i)
        for (int c = 0; c < n; ++c) {
            const cplx ov = U[i - 1].col(c).dot(U[i].col(c));
            if (std::abs(ov) < 1e-3) throw NumericalError("evolve_nxn: front frame is discontinuous");
            U[i].col(c) *= std::conj(ov) / std::abs(ov);
        }
    std::vector<CMatrix> S(m);
    for (std::size_t i = 0; i < m; ++i) S[i] = U[i].adjoint() * g.H[i] * U[i];

    Frame f;
    f.pivot = 1;
    f.U = U;
    f.lambda.assign(N, Series(m));
    f.cal.assign(N, std::vector<Series>(N));
    std::vector<std::vector<CVector>> cols(N, std::vector<CVector>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (int c = 0; c < n; ++c) {
            cols[static_cast<std::size_t>(c)][i] = U[i].col(c);
            f.lambda[static_cast<std::size_t>(c)][i] = S[i](c, c);
        }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            Series v = connection(cols[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(b)], g.ds);
            if (a < b)
                for (std::size_t i = 0; i < m; ++i) v[i] -= g.T * S[i](a, b);
            f.cal[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = std::move(v);
        }
    return f;
}

struct FrameSolution {
    std::vector<Series> q;  // q[pivot] unused
    Series S;               // exp(-i int sum_l calC_pl q_l)
    int order_used = 0;
    bool truncated = false;
    bool series_converged = true;
    double residual = 0.0;
};

// Leading tier: q_k = rho_pk calC_kp / calC_pk with
// rho^(1)_pk = calC_pk / (T dl_pk), rho^(n)_pk = i/(T dl_pk) [rho'^(n-1)_pk + i sum_l rho^(n-1)_pl calC_lk].
void leading_q(const TrajectoryGrid& g, const Frame& f, int terms, const Tolerances& tol, FrameSolution& out) {
    const int n = g.dim;
    const int p = f.pivot;
    const auto sp = static_cast<std::size_t>(p);
    const std::size_t m = g.size();
    const cplx I(0.0, 1.0);
    std::vector<Series> tdl(static_cast<std::size_t>(n), Series(m));
    for (int k = 0; k < n; ++k)
        for (std::size_t i = 0; i < m; ++i)
            tdl[static_cast<std::size_t>(k)][i] = g.T * (f.lambda[sp][i] - f.lambda[static_cast<std::size_t>(k)][i]);
    std::vector<SeriesEntry> e(static_cast<std::size_t>(n));
    std::vector<Series> cur(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        if (k == p) continue;
        const auto sk = static_cast<std::size_t>(k);
        cur[sk].resize(m);
        for (std::size_t i = 0; i < m; ++i) cur[sk][i] = f.cal[sp][sk][i] / tdl[sk][i];
        e[sk].terms.push_back(cur[sk]);
    }
    for (int order = 2; order <= terms; ++order) {
        std::vector<Series> next(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            if (k == p) continue;
            const auto sk = static_cast<std::size_t>(k);
            Series acc = derivative(cur[sk], g.ds);
            for (int l = 0; l < n; ++l) {
                if (l == p || l == k) continue;
                const auto sl = static_cast<std::size_t>(l);
                for (std::size_t i = 0; i < m; ++i) acc[i] += I * cur[sl][i] * f.cal[sl][sk][i];
            }
            for (std::size_t i = 0; i < m; ++i) acc[i] *= I / tdl[sk][i];
            next[sk] = std::move(acc);
        }
        cur = std::move(next);
        for (int k = 0; k < n; ++k)
            if (k != p) e[static_cast<std::size_t>(k)].terms.push_back(cur[static_cast<std::size_t>(k)]);
    }
    out.q.assign(static_cast<std::size_t>(n), Series());
    for (int k = 0; k < n; ++k) {
        if (k == p) continue;
        const auto sk = static_cast<std::size_t>(k);
        finalize_series(e[sk], tol.series);
        for (bool c : e[sk].converged) out.series_converged = out.series_converged && c;
        out.q[sk].resize(m);
        for (std::size_t i = 0; i < m; ++i) out.q[sk][i] = e[sk].sum[i] * f.cal[sk][sp][i] / f.cal[sp][sk][i];
        if (!finite(out.q[sk])) out.q[sk].assign(m, 0.0);
    }
}

// The non-pivot components obey the vector Riccati equation
//   -i q' = -a + M q + q (c . q),  a_k = calC_kp, M_kk = T (lambda_p - lambda_k), M_kl = calC_kl, c_l = calC_pl.
// Slow part: p_1 = M^-1 a, p_{k+1} = B_k^-1 (-i p_k' - p_k (c . p_k)), B_k = B_{k-1} + p_k c^T + (c . p_k).
// One derivative per order; iterating component-wise instead feeds derivatives of derivatives back
// through the cross terms and amplifies grid noise by 1/(T ds |dlambda|) per sweep.
void coupled_q(const TrajectoryGrid& g, const Frame& f, int order, const Tolerances& tol, FrameSolution& out) {
    const int n = g.dim;
    const int k = n - 1;
    const std::size_t m = g.size();
    const cplx I(0.0, 1.0);
    const auto sp = static_cast<std::size_t>(f.pivot);
    std::vector<std::size_t> slot;
    for (int c = 0; c < n; ++c)
        if (c != f.pivot) slot.push_back(static_cast<std::size_t>(c));

    std::vector<CMatrix> B(m, CMatrix(k, k));
    std::vector<CVector> cvec(m, CVector(k)), avec(m, CVector(k));
    double bmax = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (int r = 0; r < k; ++r) {
            const std::size_t a = slot[static_cast<std::size_t>(r)];
            avec[i](r) = f.cal[a][sp][i];
            cvec[i](r) = f.cal[sp][a][i];
            for (int c = 0; c < k; ++c)
                B[i](r, c) = r == c ? g.T * (f.lambda[sp][i] - f.lambda[a][i])
                                    : f.cal[a][slot[static_cast<std::size_t>(c)]][i];
        }
        bmax = std::max(bmax, B[i].cwiseAbs().maxCoeff());
    }
    auto dotc = [](const CVector& c, const CVector& v) { return (c.array() * v.array()).sum(); };
    auto solve = [&](std::size_t i, const CVector& rhs) -> CVector {
        Eigen::PartialPivLU<CMatrix> lu(B[i]);
        const CVector x = lu.solve(rhs);
        if (!(std::abs(lu.determinant()) > std::pow(tol.gap * std::max(bmax, 1.0), k)) || !x.allFinite())
            throw NearDegenerate("evolve_nxn: coupled slow system is singular", 0, 1);
        return x;
    };
    auto derivatives = [&](const std::vector<CVector>& v) {
        std::vector<Series> d(static_cast<std::size_t>(k), Series(m));
        for (int r = 0; r < k; ++r) {
            for (std::size_t i = 0; i < m; ++i) d[static_cast<std::size_t>(r)][i] = v[i](r);
            d[static_cast<std::size_t>(r)] = derivative(d[static_cast<std::size_t>(r)], g.ds);
        }
        return d;
    };

    std::vector<CVector> p(m), qbar(m);
    for (std::size_t i = 0; i < m; ++i) qbar[i] = p[i] = solve(i, avec[i]);
    out.order_used = 1;
    for (int lvl = 1; lvl < order; ++lvl) {
        const auto dp = derivatives(p);
        std::vector<CVector> next(m);
        std::size_t grew = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const cplx cp = dotc(cvec[i], p[i]);
            B[i] += p[i] * cvec[i].transpose() + cp * CMatrix::Identity(k, k);
            CVector rhs(k);
            for (int r = 0; r < k; ++r) rhs(r) = -I * dp[static_cast<std::size_t>(r)][i] - p[i](r) * cp;
            next[i] = solve(i, rhs);
            if (next[i].norm() > p[i].norm()) ++grew;
        }
        if (2 * grew > m) {
            out.truncated = true;
            break;
        }
        for (std::size_t i = 0; i < m; ++i) qbar[i] += next[i];
        p = std::move(next);
        out.order_used = lvl + 1;
    }

    // slow-manifold residual relative to max|a|
    const auto dq = derivatives(qbar);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const cplx cq = dotc(cvec[i], qbar[i]);
        for (int r = 0; r < k; ++r) {
            cplx v = -I * dq[static_cast<std::size_t>(r)][i] + avec[i](r) - qbar[i](r) * cq;
            for (int c = 0; c < k; ++c) v -= (r == c ? g.T * (f.lambda[sp][i] - f.lambda[slot[static_cast<std::size_t>(r)]][i])
                                                     : f.cal[slot[static_cast<std::size_t>(r)]][slot[static_cast<std::size_t>(c)]][i]) *
                                            qbar[i](c);
            num = std::max(num, std::abs(v));
            den = std::max(den, std::abs(avec[i](r)));
        }
    }
    out.residual = den > 0.0 ? num / den : num;

    // fast parts: one Bernoulli solution per component using the diagonal of Btilde
    out.q.assign(static_cast<std::size_t>(n), Series());
    for (int r = 0; r < k; ++r) {
        const std::size_t a = slot[static_cast<std::size_t>(r)];
        Series bt(m), cr(m);
        for (std::size_t i = 0; i < m; ++i) {
            bt[i] = g.T * (f.lambda[sp][i] - f.lambda[a][i]) + dotc(cvec[i], qbar[i]) + cvec[i](r) * qbar[i](r);
            cr[i] = cvec[i](r);
        }
        const auto qt = riccati_fast_part(bt, cr, -qbar[0](r), g.ds);
        Series& dst = out.q[a];
        dst.resize(m);
        for (std::size_t i = 0; i < m; ++i) dst[i] = qbar[i](r) + qt[i];
    }
}

FrameSolution solve_frame(const TrajectoryGrid& g, const Frame& f, Tier tier, const EngineOptions& opt) {
    FrameSolution out;
    if (tier == Tier::Leading)
        leading_q(g, f, opt.series_terms, opt.tol, out);
    else
        coupled_q(g, f, detail::hierarchy_order(tier, opt), opt.tol, out);
    const std::size_t m = g.size();
    const auto sp = static_cast<std::size_t>(f.pivot);
    Series integrand(m, 0.0);
    for (int l = 0; l < g.dim; ++l) {
        if (l == f.pivot) continue;
        const auto sl = static_cast<std::size_t>(l);
        for (std::size_t i = 0; i < m; ++i) integrand[i] += f.cal[sp][sl][i] * out.q[sl][i];
    }
    out.S = detail::slow_factor(Series(m, 1.0), integrand, g.ds);
    return out;
}

}  // namespace

EvolutionReport evolve_nxn(const TrajectoryGrid& g, const CVector& psi0, Tier tier, const EngineOptions& opt) {
    const int n = g.dim;
    if (n < 2) throw ValidationError("evolve_nxn: dimension must be >= 2");
    if (tier == Tier::Exact) throw ValidationError("evolve_nxn: use integrate_exact for the exact tier");
    if (completeness_rank(g.basis[0]).rank < n)
        throw NumericalError("evolve_nxn: {chi_1, eta_j} is not a basis at s = 0");

    const std::size_t m = g.size();
    const auto N = static_cast<std::size_t>(n);
    const cplx I(0.0, 1.0);
    const CVector c = split_initial_state(g, psi0);

    EvolutionReport r;
    r.tier = tier;
    auto absorb = [&r](const FrameSolution& fs) {
        r.diagnostics.hierarchy_truncated = r.diagnostics.hierarchy_truncated || fs.truncated;
        r.diagnostics.series_converged = r.diagnostics.series_converged && fs.series_converged;
        r.diagnostics.fixed_point_sweeps = std::max(r.diagnostics.fixed_point_sweeps, fs.order_used);
        r.diagnostics.fixed_point_residual = std::max(r.diagnostics.fixed_point_residual, fs.residual);
    };

    const FrameSolution a = solve_frame(g, grid_frame(g), tier, opt);
    absorb(a);

    // eta_j components: the two-level (xi_j, eta_j) branch is exact for n = 2; larger systems
    // evolve each component in its own front frame.
    std::vector<detail::BranchSolution> pair(N);
    std::vector<FrameSolution> framed(N);
    std::vector<std::vector<CMatrix>> frames(N);
    for (int j = 1; j < n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (n == 2) {
            Series rho;
            if (tier == Tier::Leading) {
                const auto sb = coherence_series(g, SeriesFlavor::NonHermitianB, opt.series_terms, opt.tol, j);
                rho = sb.entries.front().sum;
                r.diagnostics.series_converged = r.diagnostics.series_converged && sb.all_converged();
            }
            pair[sj] = detail::solve_branch(b_branch_coefficients(g, j), rho, tier, g.ds, opt);
            r.diagnostics.hierarchy_truncated = r.diagnostics.hierarchy_truncated || pair[sj].truncated;
        } else if (c(j) != cplx(0.0)) {
            Frame f = front_frame(g, j);
            framed[sj] = solve_frame(g, f, tier, opt);
            frames[sj] = std::move(f.U);
            absorb(framed[sj]);
        }
    }
    if (tier == Tier::Leading) {
        r.diagnostics.initial_condition_violated = true;
        r.diagnostics.notes.emplace_back("leading tier violates q(0) = 0");
    }

    r.s = g.s;
    r.psi.resize(m);
    r.log_scale.resize(m);
    r.amplitudes.resize(m);
    const auto& om0 = g.omega[0];
    for (std::size_t i = 0; i < m; ++i) {
        const BasisFamily& b = g.basis[i];
        const cplx a0 = c(0) * a.S[i];
        CVector dir = b.chi.col(0);
        CVector amp(n);
        amp(0) = a0;
        for (int j = 1; j < n; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            dir -= a.q[sj][i] * b.chi.col(j);
            amp(j) = -a0 * a.q[sj][i] * std::exp(-I * (om0[i] - g.omega[sj][i]));
        }
        CVector psi = a0 * dir;
        for (int j = 1; j < n; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            if (n == 2) {
                const auto& bs = pair[sj];
                psi += (c(j) * bs.S[i]) * (b.eta[sj] - bs.q[i] * b.xi[sj]);
            } else if (c(j) != cplx(0.0)) {
                const auto& fs = framed[sj];
                const CMatrix& U = frames[sj][i];
                CVector v = U.col(1);
                for (int l = 0; l < n; ++l)
                    if (l != 1) v -= fs.q[static_cast<std::size_t>(l)][i] * U.col(l);
                psi += (c(j) * fs.S[i]) * v;
            }
        }
        r.psi[i] = psi;
        r.log_scale[i] = -I * om0[i];
        r.amplitudes[i] = amp;
    }
    for (int j = 1; j < n; ++j) r.q_components.push_back(a.q[static_cast<std::size_t>(j)]);
    if (n == 2) r.q_components.push_back(pair[1].q);
    r.sa = a.S;
    if (n == 2) {
        r.qa = a.q[1];
        r.qb = pair[1].q;
        r.sb = pair[1].S;
    }
    return r;
}

}  // namespace nhdyn
