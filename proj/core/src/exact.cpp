#include "nhdyn/evolution.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace nhdyn {

EvolutionReport integrate_exact(const HamiltonianModel& model, const CVector& psi0, double s_max, int steps,
                                const Tolerances& tols) {
    if (steps < 1) throw ValidationError("integrate_exact: steps must be positive");
    if (psi0.size() != model.dim) throw ValidationError("integrate_exact: initial state has wrong dimension");
    const double n0 = psi0.norm();
    if (!(n0 > 0.0) || !psi0.allFinite()) throw ValidationError("integrate_exact: invalid initial state");

    const double ds = s_max / steps;
    const cplx I(0.0, 1.0);
    EvolutionReport r;
    r.tier = Tier::Exact;
    const auto m = static_cast<std::size_t>(steps) + 1;
    r.s.resize(m);
    r.psi.resize(m);
    r.log_scale.resize(m);

    CVector psi = psi0 / n0;
    double lognorm = std::log(n0);
    r.s[0] = 0.0;
    r.psi[0] = psi;
    r.log_scale[0] = lognorm;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const double smid = (static_cast<double>(k) + 0.5) * ds;
        const CMatrix H = model.eval(smid);
        const double bound = model.timescale * ds * H.norm();
        r.diagnostics.max_step_norm = std::max(r.diagnostics.max_step_norm, bound);
        if (bound >= tols.step_bound) {
            std::ostringstream os;
            os << "integrate_exact: step too large (T ds ||H|| = " << bound << " at s = " << smid
               << "); increase steps";
            throw ValidationError(os.str());
        }
        const CMatrix step = (CMatrix(-I * model.timescale * ds * H)).exp();
        psi = step * psi;
        const double nrm = psi.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalError("integrate_exact: state lost");
        psi /= nrm;
        lognorm += std::log(nrm);
        r.s[k + 1] = (k + 2 == m) ? s_max : static_cast<double>(k + 1) * ds;
        r.psi[k + 1] = psi;
        r.log_scale[k + 1] = lognorm;
    }
    return r;
}

namespace {

void require_matching_grid(const EvolutionReport& r, const TrajectoryGrid& g) {
    if (r.size() != g.size()) throw ValidationError("report and grid have different lengths");
}

}  // namespace

ReferenceQ reference_q(const HamiltonianModel& model, const TrajectoryGrid& grid, const Tolerances& tols) {
    if (grid.dim != 2) throw ValidationError("reference_q: 2x2 only");
    const int steps = static_cast<int>(grid.size()) - 1;
    const auto ra = integrate_exact(model, grid.basis[0].chi.col(0), grid.s_max, steps, tols);
    const auto rb = integrate_exact(model, grid.basis[0].eta[1], grid.s_max, steps, tols);
    require_matching_grid(ra, grid);
    ReferenceQ q;
    q.qa.resize(grid.size());
    q.qb.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const BasisFamily& b = grid.basis[k];
        q.qa[k] = -b.chi.col(1).dot(ra.psi[k]) / b.chi.col(0).dot(ra.psi[k]);
        q.qb[k] = -b.xi[1].dot(rb.psi[k]) / b.eta[1].dot(rb.psi[k]);
    }
    return q;
}

MultiplierSeries exact_multipliers(const HamiltonianModel& model, const TrajectoryGrid& grid,
                                   const Tolerances& tols) {
    if (grid.dim != 2) throw ValidationError("exact_multipliers: 2x2 only");
    const int steps = static_cast<int>(grid.size()) - 1;
    const auto r1 = integrate_exact(model, grid.basis[0].chi.col(0), grid.s_max, steps, tols);
    const auto r2 = integrate_exact(model, grid.basis[0].xi[1], grid.s_max, steps, tols);
    require_matching_grid(r1, grid);
    const cplx I(0.0, 1.0);
    const auto& om1 = grid.omega[0];
    MultiplierSeries d;
    const std::size_t m = grid.size();
    d.d11.resize(m);
    d.d12.resize(m);
    d.d21.resize(m);
    d.d22.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        Eigen::Matrix2cd M;
        M.col(0) = grid.basis[k].chi.col(0);
        M.col(1) = grid.basis[k].xi[1];
        Eigen::JacobiSVD<Eigen::Matrix2cd> svd(M);
        const auto sv = svd.singularValues();
        const double cond = sv(1) > 0.0 ? sv(0) / sv(1) : INFINITY;
        if (cond > tols.multiplier_cond) {
            std::ostringstream os;
            os << "exact_multipliers: eigenbasis ill-conditioned (cond " << cond << ") at s = " << grid.s[k];
            throw NumericalError(os.str());
        }
        const auto lu = M.partialPivLu();
        const Eigen::Vector2cd x1 = lu.solve(Eigen::Vector2cd(r1.state(k, I * om1[k])));
        const Eigen::Vector2cd x2 = lu.solve(Eigen::Vector2cd(r2.state(k, I * om1[k])));
        d.d11[k] = x1(0);
        d.d12[k] = x1(1);
        d.d21[k] = x2(0);
        d.d22[k] = x2(1);
    }
    return d;
}

}  // namespace nhdyn
