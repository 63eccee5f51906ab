#include "branch.hpp"

#include "nhdyn/quadrature.hpp"

#include <cmath>

namespace nhdyn {
namespace detail {

int hierarchy_order(Tier tier, const EngineOptions& opt) {
    if (tier == Tier::Subleading) return 1;
    if (opt.order < 2) throw ValidationError("full tier needs hierarchy order >= 2");
    return opt.order;
}

std::vector<cplx> slow_factor(const std::vector<cplx>& C, const std::vector<cplx>& q, double ds) {
    std::vector<cplx> f(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) f[i] = C[i] * q[i];
    auto S = cumulative_simpson(f, ds);
    const cplx I(0.0, 1.0);
    for (auto& v : S) v = std::exp(-I * v);
    return S;
}

BranchSolution solve_branch(const RiccatiCoefficients& rc, const std::vector<cplx>& rho, Tier tier, double ds,
                            const EngineOptions& opt) {
    BranchSolution b;
    const std::size_t m = rc.A.size();
    if (tier == Tier::Leading) {
        b.q.resize(m);
        for (std::size_t i = 0; i < m; ++i) b.q[i] = rho[i] * rc.A[i] / rc.C[i];
    } else {
        const auto sol = riccati_solve(rc, ds, hierarchy_order(tier, opt), opt.tol);
        b.q = sol.q;
        b.truncated = sol.truncated;
    }
    b.S = slow_factor(rc.C, b.q, ds);
    return b;
}

}  // namespace detail

RiccatiCoefficients a_branch_coefficients(const TrajectoryGrid& g) {
    if (g.dim != 2) throw ValidationError("a_branch_coefficients: two-level grids only");
    const auto a12 = berry_connection(g, {Family::Chi, 0}, {Family::Chi, 1});
    const auto a21 = berry_connection(g, {Family::Chi, 1}, {Family::Chi, 0});
    const auto c1 = g.coupling(0, 1);
    const auto l1 = g.lambda(0), l2 = g.lambda(1);
    const std::size_t m = g.size();
    RiccatiCoefficients rc;
    rc.A = a21;
    rc.B.resize(m);
    rc.C.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        rc.B[i] = g.T * (l1[i] - l2[i]);
        rc.C[i] = a12[i] - g.T * c1[i];
    }
    return rc;
}

RiccatiCoefficients b_branch_coefficients(const TrajectoryGrid& g, int j) {
    if (j < 1 || j >= g.dim) throw ValidationError("b_branch_coefficients: pair index out of range");
    const auto b12 = berry_connection(g, {Family::Eta, j}, {Family::Xi, j});
    const auto b21 = berry_connection(g, {Family::Xi, j}, {Family::Eta, j});
    const auto c2 = g.cj(j);
    const auto l1 = g.lambda(0), lj = g.lambda(j);
    RiccatiCoefficients rc;
    const std::size_t m = g.size();
    rc.A.resize(m);
    rc.B.resize(m);
    rc.C = b12;
    for (std::size_t i = 0; i < m; ++i) {
        rc.A[i] = b21[i] - g.T * c2[i];
        rc.B[i] = g.T * (l1[i] - lj[i]);
    }
    return rc;
}

EvolutionReport evolve_2x2(const TrajectoryGrid& g, const CVector& psi0, Tier tier, const EngineOptions& opt) {
    if (g.dim != 2) throw ValidationError("evolve_2x2: grid must be two-level");
    if (tier == Tier::Exact) throw ValidationError("evolve_2x2: use integrate_exact for the exact tier");
    const auto cr = completeness_rank(g.basis[0]);
    if (cr.rank < 2) throw NumericalError("evolve_2x2: {chi_1, eta_2} is not a basis at s = 0");

    const std::size_t m = g.size();
    const cplx I(0.0, 1.0);
    const CVector c = split_initial_state(g, psi0);
    const cplx a10 = c(0), b20 = c(1);

    const RiccatiCoefficients ra = a_branch_coefficients(g);
    const RiccatiCoefficients rb = b_branch_coefficients(g, 1);

    EvolutionReport r;
    r.tier = tier;
    std::vector<cplx> rho_a, rho_b;
    if (tier == Tier::Leading) {
        const auto sa = coherence_series(g, SeriesFlavor::NonHermitianA, opt.series_terms, opt.tol);
        const auto sb = coherence_series(g, SeriesFlavor::NonHermitianB, opt.series_terms, opt.tol, 1);
        rho_a = sa.entries.front().sum;
        rho_b = sb.entries.front().sum;
        r.diagnostics.series_converged = sa.all_converged() && sb.all_converged();
    }
    const auto A = detail::solve_branch(ra, rho_a, tier, g.ds, opt);
    const auto B = detail::solve_branch(rb, rho_b, tier, g.ds, opt);
    r.diagnostics.hierarchy_truncated = A.truncated || B.truncated;
    if (tier == Tier::Leading) {
        r.diagnostics.initial_condition_violated = std::abs(A.q[0]) > 0.0 || std::abs(B.q[0]) > 0.0;
        if (r.diagnostics.initial_condition_violated)
            r.diagnostics.notes.emplace_back("leading tier violates q(0) = 0");
    }

    r.s = g.s;
    r.qa = A.q;
    r.qb = B.q;
    r.sa = A.S;
    r.sb = B.S;
    r.psi.resize(m);
    r.log_scale.resize(m);
    r.amplitudes.resize(m);
    const auto& om1 = g.omega[0];
    const auto& om2 = g.omega[1];
    for (std::size_t i = 0; i < m; ++i) {
        const BasisFamily& b = g.basis[i];
        const cplx pa = a10 * A.S[i], pb = b20 * B.S[i];
        r.psi[i] = pa * (b.chi.col(0) - A.q[i] * b.chi.col(1)) + pb * (b.eta[1] - B.q[i] * b.xi[1]);
        r.log_scale[i] = -I * om1[i];
        const cplx inv_u12 = std::exp(-I * (om1[i] - om2[i]));
        CVector amp(4);
        amp << pa, -pa * A.q[i] * inv_u12, -pb * B.q[i] * inv_u12, pb;
        r.amplitudes[i] = amp;
    }
    return r;
}

}  // namespace nhdyn
