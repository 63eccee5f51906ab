#pragma once

#include "nhdyn/geometry.hpp"

#include <optional>

namespace nhdyn {

// H = [[w, c], [c, -w]],  w = exp(2 pi i s cycles) + center_offset.
struct EpModelParams {
    double c = 2.0;
    double T = 50.0;           // period of one loop in physical time
    int cycles = 1;
    std::optional<cplx> center_offset;  // defaults to -i c

    cplx center() const { return center_offset.value_or(cplx(0.0, -c)); }
    void validate() const;
};

// s in [0, 1] spans all cycles; the model timescale is T * cycles so t = s * T * cycles.
HamiltonianModel ep_model(const EpModelParams& p);

cplx ep_loop_point(const EpModelParams& p, double s);
// +/- sqrt(c^2 + w^2) (principal root first)
std::pair<cplx, cplx> ep_eigenvalues(const EpModelParams& p, double s);

// Two-level Hermitian avoided crossing: [[d(s), g], [g, -d(s)]], d = sweep * (2 s - 1).
HamiltonianModel avoided_crossing_model(double gap, double sweep, double T);

// Three-level non-Hermitian model traced along a two-parameter loop
// (p1, p2) = (cos 2 pi s, sin 2 pi s):  H = H0 + eps (p1 H1 + p2 H2).
HamiltonianModel three_level_model(double T, double eps = 0.3);

struct StateRatio {
    cplx z;
    double x = 0.0;
    double y = 0.0;
};

// z = psi_2 / psi_1; throws when |psi_1| <= tol * ||psi||.
StateRatio state_ratio(const CVector& psi, double tol = 1e-12);

}  // namespace nhdyn
