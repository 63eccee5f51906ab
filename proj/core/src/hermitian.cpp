#include "nhdyn/evolution.hpp"
#include "nhdyn/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace nhdyn {

EvolutionReport hermitian_iterate(const TrajectoryGrid& g, const CVector& c0, int n_max, const Tolerances& tols) {
    const int n = g.dim;
    const std::size_t m = g.size();
    if (c0.size() != n) throw ValidationError("hermitian_iterate: amplitude vector has wrong dimension");
    for (std::size_t k = 0; k < m; ++k) {
        const double h = g.H[k].norm();
        if ((g.H[k] - g.H[k].adjoint()).norm() > 1e-12 * std::max(h, 1.0))
            throw ValidationError("hermitian_iterate: model is not Hermitian");
    }
    const cplx I(0.0, 1.0);
    const auto series = coherence_series(g, SeriesFlavor::Hermitian, n_max, tols);

    const auto N = static_cast<std::size_t>(n);
    std::vector<std::vector<std::vector<cplx>>> U(N, std::vector<std::vector<cplx>>(N));
    std::vector<std::vector<std::vector<cplx>>> A(N, std::vector<std::vector<cplx>>(N));
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            if (k == j) continue;
            U[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = phase_factor(g, k, j);
            A[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
                berry_connection(g, {Family::Chi, k}, {Family::Chi, j});
        }
    // w_k(s) = sum_{j != k} rho_kj A_jk, fixed across sweeps
    std::vector<std::vector<cplx>> w(N, std::vector<cplx>(m, 0.0));
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            if (k == j) continue;
            const auto& rho = series.at(k, j).sum;
            const auto& ajk = A[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            for (std::size_t i = 0; i < m; ++i) w[static_cast<std::size_t>(k)][i] += rho[i] * ajk[i];
        }

    std::vector<std::vector<cplx>> c(N, std::vector<cplx>(m));
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t i = 0; i < m; ++i) c[k][i] = c0(static_cast<Eigen::Index>(k));

    EvolutionReport r;
    r.tier = Tier::Full;
    r.diagnostics.series_converged = series.all_converged();
    double prev_res = INFINITY;
    bool done = false;
    int sweep = 0;
    double res = INFINITY;
    for (sweep = 1; sweep <= tols.max_picard; ++sweep) {
        std::vector<std::vector<cplx>> next(N, std::vector<cplx>(m));
        for (int k = 0; k < n; ++k) {
            const auto sk = static_cast<std::size_t>(k);
            std::vector<cplx> integrand(m);
            for (std::size_t i = 0; i < m; ++i) integrand[i] = c[sk][i] * w[sk][i];
            const auto intra = cumulative_simpson(integrand, g.ds);
            for (std::size_t i = 0; i < m; ++i) {
                cplx v = c0(k) - I * intra[i];
                for (int j = 0; j < n; ++j) {
                    if (j == k) continue;
                    const auto sj = static_cast<std::size_t>(j);
                    const auto& rho = series.at(k, j).sum;
                    v += c[sj][i] * rho[i] * U[sk][sj][i] - c0(j) * rho[0] * U[sk][sj][0];
                }
                next[sk][i] = v;
            }
        }
        res = 0.0;
        double scale = 0.0;
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t i = 0; i < m; ++i) {
                res = std::max(res, std::abs(next[k][i] - c[k][i]));
                scale = std::max(scale, std::abs(next[k][i]));
            }
        const bool damp = res > prev_res;
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t i = 0; i < m; ++i) c[k][i] = damp ? 0.5 * (c[k][i] + next[k][i]) : next[k][i];
        prev_res = res;
        if (res <= tols.picard_tol * std::max(scale, 1.0)) {
            done = true;
            break;
        }
    }
    r.diagnostics.fixed_point_sweeps = std::min(sweep, tols.max_picard);
    r.diagnostics.fixed_point_residual = res;
    if (!done) {
        std::ostringstream os;
        os << "hermitian_iterate: Picard iteration did not converge in " << tols.max_picard
           << " sweeps (residual " << res << ")";
        throw NonConvergence(os.str(), res);
    }

    r.s = g.s;
    r.psi.resize(m);
    r.log_scale.assign(m, 0.0);
    r.amplitudes.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        CVector amp(n), psi = CVector::Zero(n);
        for (int k = 0; k < n; ++k) {
            const auto sk = static_cast<std::size_t>(k);
            amp(k) = c[sk][i];
            psi += c[sk][i] * std::exp(-I * g.omega[sk][i]) * g.basis[i].chi.col(k);
        }
        r.amplitudes[i] = amp;
        r.psi[i] = psi;
    }
    return r;
}

}  // namespace nhdyn
