#pragma once

#include "nhdyn/schur.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nhdyn {

struct HamiltonianModel {
    int dim = 0;
    std::function<CMatrix(double)> eval;  // H(s)
    double timescale = 1.0;               // T in  i dPsi/ds = T H(s) Psi
    std::string descriptor;
};

enum class Family { Chi, Xi, Eta };

struct VectorId {
    Family family = Family::Chi;
    int index = 0;  // 0-based; Xi/Eta use 1..n-1
};

struct TrajectoryGrid {
    int dim = 0;
    double T = 1.0;
    double s_max = 1.0;
    double ds = 0.0;
    std::vector<double> s;
    std::vector<CMatrix> H;
    std::vector<BasisFamily> basis;          // gauge-fixed, branch-labelled
    std::vector<std::vector<cplx>> omega;    // omega[j][k] = T * int_0^{s_k} lambda_j

    std::size_t size() const { return s.size(); }
    CVector vec(VectorId id, std::size_t k) const;
    std::vector<CVector> series(VectorId id) const;
    std::vector<cplx> lambda(int j) const;
    std::vector<cplx> coupling(int i, int j) const;  // C_ij of the labelled Schur form
    std::vector<cplx> cj(int j) const;               // C_j = <xi_j|H|eta_j>
};

TrajectoryGrid sample_trajectory(const HamiltonianModel& model, double s_max, int steps,
                                 const Tolerances& tols = default_tolerances());

// Discrete parallel transport: each tracked vector gets a unit phase making <v_k|v_{k+1}> real
// positive. Couplings and cached unitaries are updated consistently.
std::vector<BasisFamily> gauge_fix(std::vector<BasisFamily> raw);

// i <bra|d ket/ds> with central differences (second-order one-sided at the ends).
std::vector<cplx> connection(const std::vector<CVector>& bra, const std::vector<CVector>& ket, double ds);
std::vector<cplx> berry_connection(const TrajectoryGrid& grid, VectorId bra, VectorId ket);

// T * int_0^s lambda_j (composite Simpson)
std::vector<cplx> dynamical_phase(const TrajectoryGrid& grid, int j);

// U_kj = exp(i (Omega_k - Omega_j))
std::vector<cplx> phase_factor(const TrajectoryGrid& grid, int k, int j);

enum class SeriesFlavor { Hermitian, NonHermitianA, NonHermitianB, NonHermitianN };

struct SeriesEntry {
    int k = 0, j = 1;
    std::vector<std::vector<cplx>> terms;  // terms[n-1] = rho^(n)
    std::vector<cplx> sum;
    std::vector<bool> converged;
};

struct CoherenceSeries {
    SeriesFlavor flavor = SeriesFlavor::Hermitian;
    std::vector<SeriesEntry> entries;
    const SeriesEntry& at(int k, int j) const;
    bool all_converged() const;
};

// `pair` selects (xi_j, eta_j) for the B flavour.
CoherenceSeries coherence_series(const TrajectoryGrid& grid, SeriesFlavor flavor, int n_max,
                                 const Tolerances& tols = default_tolerances(), int pair = 1);

// Sums the terms pointwise, stopping at the first growing term; sets converged flags.
void finalize_series(SeriesEntry& e, double tol_series);

}  // namespace nhdyn
