#pragma once

#include "nhdyn/geometry.hpp"
#include "nhdyn/riccati.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nhdyn {

enum class Tier { Exact, Leading, Subleading, Full };

const char* tier_name(Tier t);
Tier parse_tier(const std::string& name);

struct Diagnostics {
    bool series_converged = true;
    bool hierarchy_truncated = false;
    bool initial_condition_violated = false;  // leading tier: q(0) != 0
    bool fixed_point_converged = true;
    int fixed_point_sweeps = 0;
    double fixed_point_residual = 0.0;
    double max_step_norm = 0.0;               // exact: max T ds ||H||
    std::vector<std::string> notes;
};

struct MultiplierSeries {
    std::vector<cplx> d11, d12, d21, d22;
};

// Physical state at point k is psi[k] * exp(log_scale[k]).
struct EvolutionReport {
    Tier tier = Tier::Exact;
    std::vector<double> s;
    std::vector<CVector> psi;
    std::vector<cplx> log_scale;
    // 2x2: (a1, a2, b1, b2); n x n: (a_1..a_n); Hermitian engine: c_k
    std::vector<CVector> amplitudes;
    std::vector<cplx> qa, qb, sa, sb;
    std::vector<std::vector<cplx>> q_components;  // n x n: q^a_j (j = 1..n-1), then q_b per pair
    std::optional<MultiplierSeries> multipliers;
    Diagnostics diagnostics;

    std::size_t size() const { return s.size(); }
    // psi[k] * exp(log_scale[k] + extra)
    CVector state(std::size_t k, cplx extra_log = 0.0) const;
};

struct EngineOptions {
    int order = 2;           // hierarchy depth for the full tier
    int series_terms = 4;    // rho series length for the leading tier
    Tolerances tol = default_tolerances();
};

// Two-level Riccati problems of the ordered-Schur ansatz. a-branch: A = A21, B = T dlambda,
// C = A12 - T C1 on (chi_1, chi_2). b-branch on (xi_j, eta_j): A = A^b_21 - T C_j, C = A^b_12.
RiccatiCoefficients a_branch_coefficients(const TrajectoryGrid& grid);
RiccatiCoefficients b_branch_coefficients(const TrajectoryGrid& grid, int j);

// Exponential midpoint: Psi <- exp(-i T H(s_mid) ds) Psi. The stored psi is normalised; the norm
// is carried in log_scale.
EvolutionReport integrate_exact(const HamiltonianModel& model, const CVector& psi0, double s_max, int steps,
                                const Tolerances& tols = default_tolerances());

// Picard iteration of the resummed amplitude equation for Hermitian models.
EvolutionReport hermitian_iterate(const TrajectoryGrid& grid, const CVector& c0, int n_max,
                                  const Tolerances& tols = default_tolerances());

EvolutionReport evolve_2x2(const TrajectoryGrid& grid, const CVector& psi0, Tier tier,
                           const EngineOptions& opt = {});

EvolutionReport evolve_nxn(const TrajectoryGrid& grid, const CVector& psi0, Tier tier,
                           const EngineOptions& opt = {});

// Multipliers from the q/S data of an approximate 2x2 report.
MultiplierSeries adiabatic_multipliers(const EvolutionReport& report, const TrajectoryGrid& grid,
                                       const Tolerances& tols = default_tolerances());
// Multipliers from two exact runs started at chi_1(0) and xi_2(0).
MultiplierSeries exact_multipliers(const HamiltonianModel& model, const TrajectoryGrid& grid,
                                   const Tolerances& tols = default_tolerances());

// q_a from an exact run started at chi_1(0), q_b from one started at eta_2(0).
struct ReferenceQ {
    std::vector<cplx> qa, qb;
};
ReferenceQ reference_q(const HamiltonianModel& model, const TrajectoryGrid& grid,
                       const Tolerances& tols = default_tolerances());

struct Transition {
    double s = 0.0;
    int from = 0;  // 0-based branch labels (0: chi_1 branch, 1: xi_2 branch)
    int to = 0;
};

// Weight of the chi_1 branch from the expansion psi = alpha chi_1 + beta xi_2.
std::vector<double> branch_weights(const EvolutionReport& report, const TrajectoryGrid& grid);

std::vector<Transition> detect_transition(const EvolutionReport& report, const TrajectoryGrid& grid,
                                          const Tolerances& tols = default_tolerances());

// |<a|b>|^2 / (|a|^2 |b|^2)
double fidelity(const CVector& a, const CVector& b);

// Decomposition psi0 = c_1 chi_1(0) + sum_j c_j eta_j(0).
CVector split_initial_state(const TrajectoryGrid& grid, const CVector& psi0);

}  // namespace nhdyn
