#include "nhdyn/evolution.hpp"

#include <cmath>

namespace nhdyn {

std::vector<double> branch_weights(const EvolutionReport& r, const TrajectoryGrid& g) {
    if (g.dim != 2) throw ValidationError("branch_weights: 2x2 only");
    if (r.size() != g.size()) throw ValidationError("branch_weights: report and grid lengths differ");
    std::vector<double> w(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        Eigen::Matrix2cd M;
        M.col(0) = g.basis[k].chi.col(0);
        M.col(1) = g.basis[k].xi[1];
        const Eigen::Vector2cd x = M.partialPivLu().solve(Eigen::Vector2cd(r.psi[k]));
        const double a = std::norm(x(0)), b = std::norm(x(1));
        w[k] = (a + b) > 0.0 ? a / (a + b) : 0.5;
    }
    return w;
}

std::vector<Transition> detect_transition(const EvolutionReport& r, const TrajectoryGrid& g, const Tolerances& tols) {
    const auto w = branch_weights(r, g);
    const std::size_t m = w.size();
    std::vector<Transition> out;
    if (m < 2) return out;
    auto band = [&](std::size_t k) { return w[k] >= 0.5 ? 0 : 1; };
    auto weight_of = [&](std::size_t k, int b) { return b == 0 ? w[k] : 1.0 - w[k]; };
    const double window = tols.transition_window * g.s_max;

    int current = band(0);
    for (std::size_t k = 1; k < m; ++k) {
        const int b = band(k);
        if (b == current) continue;
        bool confirmed = false;
        for (std::size_t i = k; i < m && g.s[i] <= g.s[k] + window; ++i)
            if (weight_of(i, b) > tols.transition_weight) {
                confirmed = true;
                break;
            }
        if (!confirmed) continue;
        // interpolate the w = 1/2 crossing between k-1 and k
        const double w0 = w[k - 1] - 0.5, w1 = w[k] - 0.5;
        const double f = (w0 != w1) ? w0 / (w0 - w1) : 0.0;
        const double f_clamped = std::min(1.0, std::max(0.0, f));
        out.push_back({g.s[k - 1] + f_clamped * (g.s[k] - g.s[k - 1]), current, b});
        current = b;
    }
    return out;
}

}  // namespace nhdyn
