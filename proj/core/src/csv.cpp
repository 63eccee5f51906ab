#include "nhdyn/experiment.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>

namespace nhdyn {

namespace {

using Row = std::vector<std::optional<double>>;

std::optional<cplx> ratio_or_none(const CVector& v, double tol) {
    if (v.size() != 2) return std::nullopt;
    try {
        return state_ratio(v, tol).z;
    } catch (const NumericalError&) {
        return std::nullopt;
    }
}

Row make_row(const ExperimentResult& res, const TierRun& run, std::size_t k) {
    const TrajectoryGrid& g = res.grid;
    const BasisFamily& b = g.basis[k];
    const double tol = res.config.tol.ratio;
    Row r;
    r.reserve(csv_columns().size());
    r.emplace_back(g.s[k]);
    r.emplace_back(g.s[k] * res.config.physical_time());
    for (int j = 0; j < 2; ++j) {
        r.emplace_back(b.lambda[static_cast<std::size_t>(j)].real());
        r.emplace_back(b.lambda[static_cast<std::size_t>(j)].imag());
    }
    auto push_z = [&r](std::optional<cplx> z) {
        r.emplace_back(z ? std::optional<double>(z->real()) : std::nullopt);
        r.emplace_back(z ? std::optional<double>(z->imag()) : std::nullopt);
    };
    const bool two = g.dim == 2;
    push_z(two ? ratio_or_none(b.chi.col(0), tol) : std::nullopt);
    push_z(two ? ratio_or_none(b.xi[1], tol) : std::nullopt);
    push_z(two ? ratio_or_none(run.report.psi[k], tol) : std::nullopt);

    auto abs_at = [k](const std::vector<cplx>& v) {
        return k < v.size() ? std::optional<double>(std::abs(v[k])) : std::nullopt;
    };
    r.emplace_back(abs_at(run.report.qa));
    r.emplace_back(abs_at(run.report.qb));
    if (run.report.multipliers) {
        const auto& d = *run.report.multipliers;
        r.emplace_back(abs_at(d.d11));
        r.emplace_back(abs_at(d.d12));
        r.emplace_back(abs_at(d.d21));
        r.emplace_back(abs_at(d.d22));
    } else {
        r.insert(r.end(), 4, std::nullopt);
    }
    r.emplace_back(k < run.weights.size() ? std::optional<double>(run.weights[k]) : std::nullopt);
    return r;
}

void put(std::ostream& os, const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.11e", *v);
    os << buf;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{
        "s",      "t",      "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2", "x_eig1",
        "y_eig1", "x_eig2", "y_eig2",     "x_state",    "y_state",    "abs_qa",     "abs_qb",
        "abs_d11", "abs_d12", "abs_d21",  "abs_d22",    "weight_band1"};
    return cols;
}

void write_csv(std::ostream& os, const ExperimentResult& res, const TierRun& run) {
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (std::size_t k = 0; k < run.report.size(); ++k) {
        const Row r = make_row(res, run, k);
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) os << ',';
            put(os, r[i]);
        }
        os << '\n';
    }
}

void write_series_json(std::ostream& os, const ExperimentResult& res, const TierRun& run) {
    using json = nlohmann::ordered_json;
    const auto& cols = csv_columns();
    json rows = json::array();
    for (std::size_t k = 0; k < run.report.size(); ++k) {
        const Row r = make_row(res, run, k);
        json o = json::object();
        for (std::size_t i = 0; i < r.size(); ++i)
            o[cols[i]] = (r[i] && std::isfinite(*r[i])) ? json(*r[i]) : json(nullptr);
        rows.push_back(std::move(o));
    }
    json j;
    j["tier"] = tier_name(run.tier);
    j["columns"] = cols;
    j["rows"] = std::move(rows);
    os << j.dump() << '\n';
}

}  // namespace nhdyn
