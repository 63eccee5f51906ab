#include "nhdyn/riccati.hpp"

#include "nhdyn/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace nhdyn {

namespace {

using lcplx = std::complex<long double>;

void check_coefficients(const RiccatiCoefficients& rc, const Tolerances& tols) {
    const std::size_t m = rc.A.size();
    if (m < 3 || rc.B.size() != m || rc.C.size() != m)
        throw ValidationError("riccati_solve: coefficient arrays must share a length >= 3");
    double bmax = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(std::abs(rc.A[i])) || !std::isfinite(std::abs(rc.B[i])) ||
            !std::isfinite(std::abs(rc.C[i])))
            throw ValidationError("riccati_solve: non-finite coefficient");
        bmax = std::max(bmax, std::abs(rc.B[i]));
    }
    for (std::size_t i = 0; i < m; ++i)
        if (std::abs(rc.B[i]) <= tols.gap * std::max(bmax, 1.0)) {
            std::ostringstream os;
            os << "riccati_solve: B vanishes at grid index " << i;
            throw NearDegenerate(os.str(), 0, 1);
        }
}

}  // namespace

std::vector<cplx> riccati_fast_part(const std::vector<cplx>& Btilde, const std::vector<cplx>& C, cplx qt0,
                                    double ds) {
    const std::size_t m = Btilde.size();
    if (C.size() != m) throw ValidationError("riccati_fast_part: length mismatch");
    // extended range: E = exp(i int Btilde), qt = qt0 E / (1 - qt0 int iC E)
    const lcplx li(0.0L, 1.0L);
    std::vector<lcplx> bt(m);
    for (std::size_t i = 0; i < m; ++i) bt[i] = lcplx(Btilde[i]);
    const auto ib = cumulative_simpson(bt, ds);
    std::vector<lcplx> E(m), ice(m);
    for (std::size_t i = 0; i < m; ++i) {
        E[i] = std::exp(li * ib[i]);
        ice[i] = li * lcplx(C[i]) * E[i];
    }
    const auto integral = cumulative_simpson(ice, ds);
    const lcplx q0(qt0);
    std::vector<cplx> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        const lcplx v = q0 * E[i] / (1.0L - q0 * integral[i]);
        out[i] = cplx(static_cast<double>(v.real()), static_cast<double>(v.imag()));
    }
    return out;
}

RiccatiSolution riccati_solve(const RiccatiCoefficients& rc, double ds, int order, const Tolerances& tols) {
    if (order < 1) throw ValidationError("riccati_solve: order must be >= 1");
    check_coefficients(rc, tols);
    const std::size_t m = rc.A.size();
    const cplx I(0.0, 1.0);

    RiccatiSolution sol;
    std::vector<cplx> qj(m), Bj = rc.B;
    for (std::size_t i = 0; i < m; ++i) qj[i] = rc.A[i] / rc.B[i];
    sol.hierarchy.push_back(qj);
    sol.qbar = qj;
    sol.order_used = 1;

    for (int j = 1; j < order; ++j) {
        const auto dq = derivative(qj, ds);
        std::vector<cplx> next(m);
        std::size_t grew = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const cplx Aj = -I * dq[i] - rc.C[i] * qj[i] * qj[i];
            Bj[i] += 2.0 * rc.C[i] * qj[i];
            next[i] = Aj / Bj[i];
            if (std::abs(next[i]) > std::abs(qj[i])) ++grew;
        }
        if (2 * grew > m) {
            sol.truncated = true;
            break;
        }
        for (std::size_t i = 0; i < m; ++i) sol.qbar[i] += next[i];
        sol.hierarchy.push_back(next);
        qj = std::move(next);
        sol.order_used = j + 1;
    }

    std::vector<cplx> bt(m);
    for (std::size_t i = 0; i < m; ++i) bt[i] = rc.B[i] + 2.0 * rc.C[i] * sol.qbar[i];
    sol.qtilde = riccati_fast_part(bt, rc.C, rc.q0 - sol.qbar[0], ds);
    sol.q.resize(m);
    for (std::size_t i = 0; i < m; ++i) sol.q[i] = sol.qbar[i] + sol.qtilde[i];
    return sol;
}

std::vector<cplx> riccati_rk4(const RiccatiCoefficients& rc, double ds) {
    const std::size_t m = rc.A.size();
    const cplx I(0.0, 1.0);
    auto f = [&](cplx q, cplx a, cplx b, cplx c) { return I * (-a + b * q + c * q * q); };
    std::vector<cplx> q(m);
    q[0] = rc.q0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const cplx am = 0.5 * (rc.A[k] + rc.A[k + 1]);
        const cplx bm = 0.5 * (rc.B[k] + rc.B[k + 1]);
        const cplx cm = 0.5 * (rc.C[k] + rc.C[k + 1]);
        const cplx k1 = f(q[k], rc.A[k], rc.B[k], rc.C[k]);
        const cplx k2 = f(q[k] + 0.5 * ds * k1, am, bm, cm);
        const cplx k3 = f(q[k] + 0.5 * ds * k2, am, bm, cm);
        const cplx k4 = f(q[k] + ds * k3, rc.A[k + 1], rc.B[k + 1], rc.C[k + 1]);
        q[k + 1] = q[k] + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return q;
}

}  // namespace nhdyn
