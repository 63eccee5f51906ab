#pragma once

#include "nhdyn/evolution.hpp"

#include <vector>

namespace nhdyn::detail {

// One two-level Riccati problem -i q' = -A + B q + C q^2 together with its slow factor
// S = exp(-i int C q).
struct BranchSolution {
    std::vector<cplx> q;
    std::vector<cplx> S;
    bool series_converged = true;
    bool truncated = false;
};

BranchSolution solve_branch(const RiccatiCoefficients& rc, const std::vector<cplx>& rho, Tier tier,
                            double ds, const EngineOptions& opt);

std::vector<cplx> slow_factor(const std::vector<cplx>& C, const std::vector<cplx>& q, double ds);

int hierarchy_order(Tier tier, const EngineOptions& opt);

}  // namespace nhdyn::detail
