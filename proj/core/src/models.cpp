#include "nhdyn/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace nhdyn {

void EpModelParams::validate() const {
    if (!(c != 0.0) || !std::isfinite(c)) throw ValidationError("ep_model: c must be finite and nonzero");
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("ep_model: T must be positive");
    if (cycles < 1) throw ValidationError("ep_model: cycles must be >= 1");
    const cplx z = center();
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ValidationError("ep_model: bad center_offset");
}

cplx ep_loop_point(const EpModelParams& p, double s) {
    const double ang = 2.0 * std::numbers::pi * s * p.cycles;
    return cplx(std::cos(ang), std::sin(ang)) + p.center();
}

std::pair<cplx, cplx> ep_eigenvalues(const EpModelParams& p, double s) {
    const cplx w = ep_loop_point(p, s);
    const cplx r = complex_sqrt_principal(p.c * p.c + w * w);
    return {r, -r};
}

HamiltonianModel ep_model(const EpModelParams& p) {
    p.validate();
    HamiltonianModel m;
    m.dim = 2;
    m.timescale = p.T * p.cycles;
    const EpModelParams q = p;
    m.eval = [q](double s) {
        const cplx w = ep_loop_point(q, s);
        CMatrix H(2, 2);
        H << w, q.c, q.c, -w;
        return H;
    };
    std::ostringstream os;
    os << "ep(c=" << p.c << ",T=" << p.T << ",cycles=" << p.cycles << ",center=" << p.center().real() << ","
       << p.center().imag() << ")";
    m.descriptor = os.str();
    return m;
}

HamiltonianModel avoided_crossing_model(double gap, double sweep, double T) {
    if (!(T > 0.0)) throw ValidationError("avoided_crossing_model: T must be positive");
    if (gap == 0.0) throw ValidationError("avoided_crossing_model: zero gap is a true crossing");
    HamiltonianModel m;
    m.dim = 2;
    m.timescale = T;
    m.eval = [gap, sweep](double s) {
        const double d = sweep * (2.0 * s - 1.0);
        CMatrix H(2, 2);
        H << d, gap, gap, -d;
        return H;
    };
    std::ostringstream os;
    os << "avoided_crossing(gap=" << gap << ",sweep=" << sweep << ",T=" << T << ")";
    m.descriptor = os.str();
    return m;
}

HamiltonianModel three_level_model(double T, double eps) {
    if (!(T > 0.0)) throw ValidationError("three_level_model: T must be positive");
    const cplx I(0.0, 1.0);
    CMatrix H0(3, 3), H1(3, 3), H2(3, 3);
    H0 << 1.0 - 0.05 * I, 0.2, 0.0,
          0.2, -0.6 * I, 0.15,
          0.0, 0.15, -1.0 - 1.2 * I;
    H1 << 0.0, 1.0, 0.3 * I,
          1.0, 0.2, 0.5,
          0.3 * I, 0.5, 0.0;
    H2 << 0.3, 0.4 * I, 0.0,
          0.4 * I, 0.0, 0.6,
          0.0, 0.6, -0.2;
    HamiltonianModel m;
    m.dim = 3;
    m.timescale = T;
    m.eval = [H0, H1, H2, eps](double s) {
        const double a = 2.0 * std::numbers::pi * s;
        return CMatrix(H0 + eps * (std::cos(a) * H1 + std::sin(a) * H2));
    };
    std::ostringstream os;
    os << "three_level(T=" << T << ",eps=" << eps << ")";
    m.descriptor = os.str();
    return m;
}

StateRatio state_ratio(const CVector& psi, double tol) {
    if (psi.size() != 2) throw ValidationError("state_ratio: two-component state required");
    const double nrm = psi.norm();
    if (!(std::abs(psi(0)) > tol * nrm)) throw NumericalError("state_ratio: first component vanishes");
    StateRatio r;
    r.z = psi(1) / psi(0);
    r.x = r.z.real();
    r.y = r.z.imag();
    return r;
}

}  // namespace nhdyn
