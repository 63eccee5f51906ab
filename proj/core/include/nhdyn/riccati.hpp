#pragma once

#include "nhdyn/linalg.hpp"

#include <vector>

namespace nhdyn {

// -i dq/ds = -A + B q + C q^2 on a uniform grid.
struct RiccatiCoefficients {
    std::vector<cplx> A, B, C;
    cplx q0 = 0.0;
};

struct RiccatiSolution {
    std::vector<cplx> q;       // qbar + qtilde
    std::vector<cplx> qbar;    // slow hierarchy sum q_1 + ... + q_order
    std::vector<cplx> qtilde;  // closed-form fast part
    std::vector<std::vector<cplx>> hierarchy;  // hierarchy[j-1] = q_j
    int order_used = 0;
    bool truncated = false;    // hierarchy stopped early because terms grew
};

// Slow hierarchy q_{j+1} = A_j / B_j, then the exact Bernoulli solution for the remainder with
// Btilde = B + 2 C qbar and qtilde(0) = q0 - qbar(0).
RiccatiSolution riccati_solve(const RiccatiCoefficients& rc, double ds, int order,
                              const Tolerances& tols = default_tolerances());

// Bernoulli solution of -i qt' = Btilde qt + C qt^2 with qt(0) = qt0.
std::vector<cplx> riccati_fast_part(const std::vector<cplx>& Btilde, const std::vector<cplx>& C, cplx qt0,
                                    double ds);

// Reference integrator for tests and diagnostics: classical RK4 with coefficients
// interpolated linearly at half steps.
std::vector<cplx> riccati_rk4(const RiccatiCoefficients& rc, double ds);

}  // namespace nhdyn
