#include "nhdyn/evolution.hpp"

#include <cmath>
#include <sstream>

namespace nhdyn {

MultiplierSeries adiabatic_multipliers(const EvolutionReport& r, const TrajectoryGrid& g, const Tolerances& tols) {
    if (g.dim != 2) throw ValidationError("adiabatic_multipliers: 2x2 only");
    if (r.tier == Tier::Exact)
        throw ValidationError("adiabatic_multipliers: exact reports need exact_multipliers (two runs)");
    const std::size_t m = g.size();
    if (r.qa.size() != m || r.qb.size() != m || r.sa.size() != m || r.sb.size() != m)
        throw ValidationError("adiabatic_multipliers: report lacks q/S series on this grid");

    const BasisFamily& b0 = g.basis[0];
    const cplx eta0 = b0.xi[1].dot(b0.chi.col(0));  // <xi_2(0)|chi_1(0)>
    const cplx dl0 = b0.lambda[0] - b0.lambda[1];
    const cplx c20 = b0.cj[1];
    const double tiny = 1e-12;
    if (std::abs(eta0) < tiny) throw NumericalError("adiabatic_multipliers: <xi_2(0)|chi_1(0)> vanishes");
    if (std::abs(c20) < tiny) throw NumericalError("adiabatic_multipliers: C_2(0) vanishes");
    (void)tols;

    MultiplierSeries d;
    d.d11.resize(m);
    d.d12.resize(m);
    d.d21.resize(m);
    d.d22.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const BasisFamily& b = g.basis[k];
        const cplx dl = b.lambda[0] - b.lambda[1];
        const cplx c1 = b.coupling(0, 1);
        const cplx c2 = b.cj[1];
        const cplx chi2_xi2 = b.chi.col(1).dot(b.xi[1]);
        const cplx eta2_chi1 = b.eta[1].dot(b.chi.col(0));
        if (std::abs(chi2_xi2) < tiny || std::abs(eta2_chi1) < tiny) {
            std::ostringstream os;
            os << "adiabatic_multipliers: coalescing bases at s = " << g.s[k];
            throw NumericalError(os.str());
        }
        d.d11[k] = r.sa[k] * (1.0 - r.qa[k] * c1 / dl);
        d.d12[k] = -r.sa[k] * r.qa[k] / chi2_xi2;
        d.d21[k] = d.d11[k] / eta0 - dl0 * r.sb[k] / (c20 * eta2_chi1);
        d.d22[k] = d.d12[k] / eta0 + dl0 * r.sb[k] / c20 * (r.qb[k] + c2 / dl);
    }
    return d;
}

}  // namespace nhdyn
