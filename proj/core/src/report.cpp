#include "nhdyn/evolution.hpp"

#include <cmath>

namespace nhdyn {

const char* tier_name(Tier t) {
    switch (t) {
        case Tier::Exact: return "exact";
        case Tier::Leading: return "leading";
        case Tier::Subleading: return "subleading";
        case Tier::Full: return "full";
    }
    return "?";
}

Tier parse_tier(const std::string& name) {
    if (name == "exact") return Tier::Exact;
    if (name == "leading") return Tier::Leading;
    if (name == "subleading") return Tier::Subleading;
    if (name == "full") return Tier::Full;
    throw ValidationError("unknown tier '" + name + "'");
}

CVector EvolutionReport::state(std::size_t k, cplx extra_log) const {
    return psi[k] * std::exp(log_scale[k] + extra_log);
}

double fidelity(const CVector& a, const CVector& b) {
    const double na = a.squaredNorm(), nb = b.squaredNorm();
    if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
    return std::norm(a.dot(b)) / (na * nb);
}

CVector split_initial_state(const TrajectoryGrid& grid, const CVector& psi0) {
    if (psi0.size() != grid.dim) throw ValidationError("initial state has wrong dimension");
    const CMatrix M = completeness_matrix(grid.basis[0]);
    return M.fullPivLu().solve(psi0);
}

}  // namespace nhdyn
