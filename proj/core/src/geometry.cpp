#include "nhdyn/geometry.hpp"

#include "nhdyn/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace nhdyn {

CVector TrajectoryGrid::vec(VectorId id, std::size_t k) const {
    const BasisFamily& b = basis[k];
    switch (id.family) {
        case Family::Chi: return b.chi.col(id.index);
        case Family::Xi: return b.xi[static_cast<std::size_t>(id.index)];
        case Family::Eta: return b.eta[static_cast<std::size_t>(id.index)];
    }
    return {};
}

std::vector<CVector> TrajectoryGrid::series(VectorId id) const {
    std::vector<CVector> out(size());
    for (std::size_t k = 0; k < size(); ++k) out[k] = vec(id, k);
    return out;
}

std::vector<cplx> TrajectoryGrid::lambda(int j) const {
    std::vector<cplx> out(size());
    for (std::size_t k = 0; k < size(); ++k) out[k] = basis[k].lambda[static_cast<std::size_t>(j)];
    return out;
}

std::vector<cplx> TrajectoryGrid::coupling(int i, int j) const {
    std::vector<cplx> out(size());
    for (std::size_t k = 0; k < size(); ++k) out[k] = basis[k].coupling(i, j);
    return out;
}

std::vector<cplx> TrajectoryGrid::cj(int j) const {
    std::vector<cplx> out(size());
    for (std::size_t k = 0; k < size(); ++k) out[k] = basis[k].cj[static_cast<std::size_t>(j)];
    return out;
}

namespace {

cplx unit_phase(cplx overlap, double s_index) {
    const double m = std::abs(overlap);
    if (!(m > 1e-8)) {
        std::ostringstream os;
        os << "gauge_fix: vanishing overlap between consecutive bases at point " << s_index;
        throw NumericalError(os.str());
    }
    return std::conj(overlap) / m;
}

void check_branch_ambiguity(const std::vector<cplx>& prev, const std::vector<cplx>& cur, double s) {
    if (prev.size() < 2) return;
    for (const cplx& t : prev) {
        double d1 = INFINITY, d2 = INFINITY;
        for (const cplx& c : cur) {
            const double d = std::abs(c - t);
            if (d < d1) {
                d2 = d1;
                d1 = d;
            } else if (d < d2) {
                d2 = d;
            }
        }
        if (d2 < 2.0 * d1) {
            std::ostringstream os;
            os << "sample_trajectory: ambiguous branch matching at s = " << s << "; use a finer grid";
            throw NumericalError(os.str());
        }
    }
}

}  // namespace

std::vector<BasisFamily> gauge_fix(std::vector<BasisFamily> fams) {
    for (std::size_t k = 1; k < fams.size(); ++k) {
        const BasisFamily& prev = fams[k - 1];
        BasisFamily& cur = fams[k];
        const int n = cur.dim();
        const double kd = static_cast<double>(k);
        std::vector<cplx> ph(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            ph[static_cast<std::size_t>(j)] = unit_phase(prev.chi.col(j).dot(cur.chi.col(j)), kd);
            cur.chi.col(j) *= ph[static_cast<std::size_t>(j)];
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                cur.schur(i, j) *= std::conj(ph[static_cast<std::size_t>(i)]) * ph[static_cast<std::size_t>(j)];
        for (int j = 1; j < n; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            cur.c1[sj] = cur.schur(0, j);
            const cplx px = unit_phase(prev.xi[sj].dot(cur.xi[sj]), kd);
            const cplx pe = unit_phase(prev.eta[sj].dot(cur.eta[sj]), kd);
            cur.xi[sj] *= px;
            cur.eta[sj] *= pe;
            cur.cj[sj] *= std::conj(px) * pe;
            CMatrix& fu = cur.front_unitary[sj];
            fu.col(0) *= px;
            fu.col(1) *= pe;
            CMatrix& fs = cur.front_schur[sj];
            fs.row(0) *= std::conj(px);
            fs.row(1) *= std::conj(pe);
            fs.col(0) *= px;
            fs.col(1) *= pe;
        }
    }
    return fams;
}

TrajectoryGrid sample_trajectory(const HamiltonianModel& model, double s_max, int steps,
                                 const Tolerances& tols) {
    if (steps < 64) throw ValidationError("sample_trajectory: steps must be >= 64");
    if (!(s_max > 0.0)) throw ValidationError("sample_trajectory: s_max must be positive");
    if (!model.eval) throw ValidationError("sample_trajectory: model has no evaluator");

    TrajectoryGrid g;
    g.dim = model.dim;
    g.T = model.timescale;
    g.s_max = s_max;
    g.ds = s_max / steps;
    const auto m = static_cast<std::size_t>(steps) + 1;
    g.s.resize(m);
    g.H.resize(m);
    std::vector<BasisFamily> raw(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double s = (k + 1 == m) ? s_max : static_cast<double>(k) * g.ds;
        g.s[k] = s;
        g.H[k] = model.eval(s);
        if (g.H[k].rows() != model.dim || g.H[k].cols() != model.dim)
            throw ValidationError("sample_trajectory: model returned wrong dimension");
        try {
            const SchurDecomposition sd = schur_decompose(g.H[k], tols.recon, tols);
            check_gaps(sd.eigenvalues, tols, s);
            if (k == 0) {
                raw[k] = build_basis_family(g.H[k], tols);
            } else {
                check_branch_ambiguity(raw[k - 1].lambda, sd.eigenvalues, s);
                raw[k] = build_basis_family_ordered(g.H[k], raw[k - 1].lambda, tols);
            }
        } catch (const NearDegenerate& e) {
            throw NearDegenerate(e.what(), e.first(), e.second(), s);
        }
    }
    g.basis = gauge_fix(std::move(raw));
    g.omega.resize(static_cast<std::size_t>(g.dim));
    for (int j = 0; j < g.dim; ++j) g.omega[static_cast<std::size_t>(j)] = dynamical_phase(g, j);
    return g;
}

std::vector<cplx> connection(const std::vector<CVector>& bra, const std::vector<CVector>& ket, double ds) {
    const std::size_t m = ket.size();
    if (bra.size() != m || m < 3) throw ValidationError("connection: need >= 3 matching samples");
    std::vector<cplx> out(m);
    const cplx I(0.0, 1.0);
    for (std::size_t k = 0; k < m; ++k) {
        CVector d;
        if (k == 0)
            d = (-3.0 * ket[0] + 4.0 * ket[1] - ket[2]) / (2.0 * ds);
        else if (k + 1 == m)
            d = (3.0 * ket[m - 1] - 4.0 * ket[m - 2] + ket[m - 3]) / (2.0 * ds);
        else
            d = (ket[k + 1] - ket[k - 1]) / (2.0 * ds);
        out[k] = I * bra[k].dot(d);
    }
    return out;
}

std::vector<cplx> berry_connection(const TrajectoryGrid& grid, VectorId bra, VectorId ket) {
    return connection(grid.series(bra), grid.series(ket), grid.ds);
}

std::vector<cplx> dynamical_phase(const TrajectoryGrid& grid, int j) {
    auto out = cumulative_simpson(grid.lambda(j), grid.ds);
    for (auto& v : out) v *= grid.T;
    return out;
}

std::vector<cplx> phase_factor(const TrajectoryGrid& grid, int k, int j) {
    const auto& ok = grid.omega[static_cast<std::size_t>(k)];
    const auto& oj = grid.omega[static_cast<std::size_t>(j)];
    std::vector<cplx> out(grid.size());
    const cplx I(0.0, 1.0);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(I * (ok[i] - oj[i]));
    return out;
}

const SeriesEntry& CoherenceSeries::at(int k, int j) const {
    for (const auto& e : entries)
        if (e.k == k && e.j == j) return e;
    throw ValidationError("CoherenceSeries: no such entry");
}

bool CoherenceSeries::all_converged() const {
    for (const auto& e : entries)
        for (bool c : e.converged)
            if (!c) return false;
    return true;
}

void finalize_series(SeriesEntry& e, double tol_series) {
    const std::size_t m = e.terms.empty() ? 0 : e.terms.front().size();
    e.sum.assign(m, 0.0);
    e.converged.assign(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        cplx acc = e.terms[0][i];
        double last = std::abs(e.terms[0][i]);
        bool monotone = true;
        for (std::size_t n = 1; n < e.terms.size(); ++n) {
            const double mag = std::abs(e.terms[n][i]);
            if (mag > last) {
                monotone = false;
                break;
            }
            acc += e.terms[n][i];
            last = mag;
        }
        e.sum[i] = acc;
        e.converged[i] = monotone && last <= tol_series * std::abs(e.terms[0][i]);
    }
}

namespace {

std::vector<cplx> scaled_ratio(const std::vector<cplx>& num, const std::vector<cplx>& den, cplx factor) {
    std::vector<cplx> out(num.size());
    for (std::size_t i = 0; i < num.size(); ++i) out[i] = factor * num[i] / den[i];
    return out;
}

void require_gap(const std::vector<cplx>& dl, const TrajectoryGrid& g, const Tolerances& tols) {
    for (std::size_t i = 0; i < dl.size(); ++i) {
        double scale = 0.0;
        for (const auto& l : g.basis[i].lambda) scale = std::max(scale, std::abs(l));
        if (std::abs(dl[i]) < tols.gap * std::max(scale, 1.0))
            throw NearDegenerate("coherence_series: vanishing level spacing", 0, 1, g.s[i]);
    }
}

// 2x2 flavours: rho^(1) = num / (T dl), rho^(n) = i rho'^(n-1) / (T dl)
SeriesEntry two_level_series(const std::vector<cplx>& num, const std::vector<cplx>& tdl, double ds,
                             int n_max, int k, int j, double tol_series) {
    SeriesEntry e;
    e.k = k;
    e.j = j;
    e.terms.push_back(scaled_ratio(num, tdl, 1.0));
    for (int n = 2; n <= n_max; ++n) {
        const auto d = derivative(e.terms.back(), ds);
        e.terms.push_back(scaled_ratio(d, tdl, cplx(0.0, 1.0)));
    }
    finalize_series(e, tol_series);
    return e;
}

}  // namespace

CoherenceSeries coherence_series(const TrajectoryGrid& g, SeriesFlavor flavor, int n_max,
                                 const Tolerances& tols, int pair) {
    if (n_max < 1) throw ValidationError("coherence_series: n_max must be >= 1");
    const int n = g.dim;
    const std::size_t m = g.size();
    const cplx I(0.0, 1.0);
    CoherenceSeries cs;
    cs.flavor = flavor;

    auto tdl_of = [&](int a, int b) {
        const auto la = g.lambda(a), lb = g.lambda(b);
        std::vector<cplx> out(m);
        for (std::size_t i = 0; i < m; ++i) out[i] = g.T * (la[i] - lb[i]);
        require_gap(out, g, tols);
        return out;
    };

    switch (flavor) {
        case SeriesFlavor::NonHermitianA: {
            const auto a12 = berry_connection(g, {Family::Chi, 0}, {Family::Chi, 1});
            const auto c1 = g.coupling(0, 1);
            std::vector<cplx> num(m);
            for (std::size_t i = 0; i < m; ++i) num[i] = a12[i] - g.T * c1[i];
            cs.entries.push_back(two_level_series(num, tdl_of(0, 1), g.ds, n_max, 0, 1, tols.series));
            break;
        }
        case SeriesFlavor::NonHermitianB: {
            if (pair < 1 || pair >= n) throw ValidationError("coherence_series: bad pair index");
            const auto b12 = berry_connection(g, {Family::Eta, pair}, {Family::Xi, pair});
            cs.entries.push_back(two_level_series(b12, tdl_of(0, pair), g.ds, n_max, 0, pair, tols.series));
            break;
        }
        case SeriesFlavor::Hermitian:
        case SeriesFlavor::NonHermitianN: {
            const bool herm = flavor == SeriesFlavor::Hermitian;
            // coupling functions: A_kj (Hermitian) or C^a_kj = A^a_kj - T C_kj
            std::vector<std::vector<std::vector<cplx>>> cpl(
                static_cast<std::size_t>(n), std::vector<std::vector<cplx>>(static_cast<std::size_t>(n)));
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    if (a == b) continue;
                    auto v = berry_connection(g, {Family::Chi, a}, {Family::Chi, b});
                    if (!herm) {
                        const auto c = g.coupling(a, b);
                        for (std::size_t i = 0; i < m; ++i) v[i] -= g.T * c[i];
                    }
                    cpl[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = std::move(v);
                }
            std::vector<std::pair<int, int>> pairs;
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j)
                    if (k != j && (herm || k == 0)) pairs.emplace_back(k, j);
            std::vector<std::vector<cplx>> tdl;
            for (auto [k, j] : pairs) tdl.push_back(tdl_of(k, j));
            // current term per pair
            std::vector<std::vector<cplx>> cur;
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                auto [k, j] = pairs[p];
                cur.push_back(scaled_ratio(cpl[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)], tdl[p], 1.0));
            }
            cs.entries.resize(pairs.size());
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                cs.entries[p].k = pairs[p].first;
                cs.entries[p].j = pairs[p].second;
                cs.entries[p].terms.push_back(cur[p]);
            }
            auto find = [&](int k, int j) -> int {
                for (std::size_t p = 0; p < pairs.size(); ++p)
                    if (pairs[p].first == k && pairs[p].second == j) return static_cast<int>(p);
                return -1;
            };
            for (int order = 2; order <= n_max; ++order) {
                std::vector<std::vector<cplx>> next(pairs.size());
                for (std::size_t p = 0; p < pairs.size(); ++p) {
                    auto [k, j] = pairs[p];
                    auto acc = derivative(cur[p], g.ds);
                    // i * sum_{l != k} rho_kl A_lj  (l >= 1 for the n x n a-flavour)
                    for (int l = 0; l < n; ++l) {
                        if (l == k || l == j) continue;
                        const int q = find(k, l);
                        if (q < 0) continue;
                        const auto& clj = cpl[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
                        for (std::size_t i = 0; i < m; ++i) acc[i] += I * cur[static_cast<std::size_t>(q)][i] * clj[i];
                    }
                    next[p] = scaled_ratio(acc, tdl[p], I);
                }
                cur = std::move(next);
                for (std::size_t p = 0; p < pairs.size(); ++p) cs.entries[p].terms.push_back(cur[p]);
            }
            for (auto& e : cs.entries) finalize_series(e, tols.series);
            break;
        }
    }
    return cs;
}

}  // namespace nhdyn
