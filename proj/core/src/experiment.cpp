#include "nhdyn/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nhdyn {

using json = nlohmann::ordered_json;

namespace {

const char* model_name(ModelKind m) {
    switch (m) {
        case ModelKind::Ep: return "ep";
        case ModelKind::AvoidedCrossing: return "avoided_crossing";
        case ModelKind::ThreeLevel: return "three_level";
    }
    return "?";
}

const char* init_name(InitKind k) {
    switch (k) {
        case InitKind::Amplifying: return "amplifying";
        case InitKind::Decaying: return "decaying";
        case InitKind::Custom: return "custom";
    }
    return "?";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config key '" + key + "' has the wrong type");
    }
}

cplx parse_complex(const json& v, const std::string& key) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ValidationError("config key '" + key + "' must be a number or [re, im]");
}

}  // namespace

double ExperimentConfig::physical_time() const {
    return model == ModelKind::Ep ? ep.T * ep.cycles : ep.T;
}

void ExperimentConfig::validate() const {
    if (name.empty() || name.find_first_of("/\\") != std::string::npos)
        throw ValidationError("config: name must be a plain file stem");
    if (model == ModelKind::Ep) {
        ep.validate();
    } else {
        if (!(ep.T > 0.0)) throw ValidationError("config: T must be positive");
    }
    if (steps < 64) throw ValidationError("config: steps must be >= 64");
    if (tiers.empty()) throw ValidationError("config: at least one tier required");
    if (std::find(tiers.begin(), tiers.end(), Tier::Full) != tiers.end() && order < 2)
        throw ValidationError("config: the full tier needs order >= 2");
    if (order < 1) throw ValidationError("config: order must be >= 1");
    if (series_terms < 1) throw ValidationError("config: series_terms must be >= 1");
    if (format != "csv" && format != "json") throw ValidationError("config: format must be csv or json");
    const int dim = model == ModelKind::ThreeLevel ? 3 : 2;
    if (init == InitKind::Custom) {
        if (custom_init.size() != dim) throw ValidationError("config: custom init has the wrong dimension");
        if (!custom_init.allFinite() || !(custom_init.norm() > 0.0))
            throw ValidationError("config: custom init must be finite and nonzero");
    }
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config: top level must be an object");

    ExperimentConfig cfg;
    for (const auto& [key, v] : j.items()) {
        if (key == "name") {
            cfg.name = get_as<std::string>(v, key);
        } else if (key == "model") {
            const auto m = get_as<std::string>(v, key);
            if (m == "ep") cfg.model = ModelKind::Ep;
            else if (m == "avoided_crossing") cfg.model = ModelKind::AvoidedCrossing;
            else if (m == "three_level") cfg.model = ModelKind::ThreeLevel;
            else throw ValidationError("config: unknown model '" + m + "'");
        } else if (key == "c") {
            cfg.ep.c = get_as<double>(v, key);
        } else if (key == "T") {
            cfg.ep.T = get_as<double>(v, key);
        } else if (key == "cycles") {
            cfg.ep.cycles = get_as<int>(v, key);
        } else if (key == "center_offset") {
            cfg.ep.center_offset = parse_complex(v, key);
        } else if (key == "gap") {
            cfg.gap = get_as<double>(v, key);
        } else if (key == "sweep") {
            cfg.sweep = get_as<double>(v, key);
        } else if (key == "eps") {
            cfg.eps = get_as<double>(v, key);
        } else if (key == "steps") {
            cfg.steps = get_as<int>(v, key);
        } else if (key == "tiers") {
            if (!v.is_array()) throw ValidationError("config: tiers must be an array");
            cfg.tiers.clear();
            for (const auto& t : v) cfg.tiers.push_back(parse_tier(get_as<std::string>(t, key)));
        } else if (key == "init") {
            const auto s = get_as<std::string>(v, key);
            if (s == "amplifying") cfg.init = InitKind::Amplifying;
            else if (s == "decaying") cfg.init = InitKind::Decaying;
            else if (s == "custom") cfg.init = InitKind::Custom;
            else throw ValidationError("config: unknown init '" + s + "'");
        } else if (key == "init_vector") {
            if (!v.is_array()) throw ValidationError("config: init_vector must be an array");
            cfg.custom_init.resize(static_cast<Eigen::Index>(v.size()));
            for (std::size_t i = 0; i < v.size(); ++i)
                cfg.custom_init(static_cast<Eigen::Index>(i)) = parse_complex(v[i], key);
        } else if (key == "out_dir") {
            cfg.out_dir = get_as<std::string>(v, key);
        } else if (key == "format") {
            cfg.format = get_as<std::string>(v, key);
        } else if (key == "order") {
            cfg.order = get_as<int>(v, key);
        } else if (key == "series_terms") {
            cfg.series_terms = get_as<int>(v, key);
        } else if (key == "multipliers") {
            cfg.multipliers = get_as<bool>(v, key);
        } else if (key.rfind("tol_", 0) == 0) {
            set_tolerance(cfg.tol, key.substr(4), get_as<double>(v, key));
        } else {
            throw ValidationError("config: unknown key '" + key + "'");
        }
    }
    if (j.contains("init_vector") && cfg.init != InitKind::Custom)
        throw ValidationError("config: init_vector given but init is not 'custom'");
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

HamiltonianModel build_model(const ExperimentConfig& cfg) {
    switch (cfg.model) {
        case ModelKind::Ep: return ep_model(cfg.ep);
        case ModelKind::AvoidedCrossing: return avoided_crossing_model(cfg.gap, cfg.sweep, cfg.ep.T);
        case ModelKind::ThreeLevel: return three_level_model(cfg.ep.T, cfg.eps);
    }
    throw ValidationError("unknown model");
}

CVector initial_state(const ExperimentConfig& cfg, const TrajectoryGrid& grid) {
    const BasisFamily& b = grid.basis[0];
    switch (cfg.init) {
        case InitKind::Amplifying: return b.chi.col(0).normalized();
        case InitKind::Decaying: return b.xi[static_cast<std::size_t>(grid.dim - 1)].normalized();
        case InitKind::Custom: return cfg.custom_init;
    }
    throw ValidationError("unknown init");
}

double max_relative_error(const std::vector<cplx>& a, const std::vector<cplx>& b, double floor) {
    if (a.size() != b.size()) throw ValidationError("max_relative_error: length mismatch");
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double rb = std::abs(b[i]);
        if (rb > floor) e = std::max(e, std::abs(std::abs(a[i]) - rb) / rb);
    }
    return e;
}

const TierRun* ExperimentResult::find(Tier t) const {
    for (const auto& r : runs)
        if (r.tier == t) return &r;
    return nullptr;
}

ExperimentResult compute_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    res.config = cfg;
    res.model = build_model(cfg);
    const int steps = cfg.total_steps();
    res.grid = sample_trajectory(res.model, 1.0, steps, cfg.tol);
    const TrajectoryGrid& g = res.grid;
    const CVector psi0 = initial_state(cfg, g);
    const bool two = g.dim == 2;

    EngineOptions opt;
    opt.order = cfg.order;
    opt.series_terms = cfg.series_terms;
    opt.tol = cfg.tol;

    // exact oracle first; every other tier is compared against it
    std::vector<Tier> order{Tier::Exact};
    for (Tier t : cfg.tiers)
        if (std::find(order.begin(), order.end(), t) == order.end()) order.push_back(t);

    if (two) {
        try {
            res.reference = reference_q(res.model, g, cfg.tol);
            if (cfg.multipliers) res.exact_multipliers = exact_multipliers(res.model, g, cfg.tol);
        } catch (const NumericalError& e) {
            res.errors.emplace_back(e.what());
        }
    }

    res.runs.reserve(order.size());  // `exact` points into this vector
    const EvolutionReport* exact = nullptr;
    for (Tier t : order) {
        TierRun run;
        run.tier = t;
        const auto t1 = std::chrono::steady_clock::now();
        try {
            if (t == Tier::Exact) run.report = integrate_exact(res.model, psi0, 1.0, steps, cfg.tol);
            else if (two) run.report = evolve_2x2(g, psi0, t, opt);
            else run.report = evolve_nxn(g, psi0, t, opt);

            if (two) {
                if (t == Tier::Exact) {
                    if (res.exact_multipliers) run.report.multipliers = res.exact_multipliers;
                } else if (cfg.multipliers) {
                    run.report.multipliers = adiabatic_multipliers(run.report, g, cfg.tol);
                }
                run.weights = branch_weights(run.report, g);
                run.transitions = detect_transition(run.report, g, cfg.tol);
            }
            if (t != Tier::Exact && exact) {
                double fmin = 1.0;
                for (std::size_t k = 0; k < g.size(); ++k)
                    fmin = std::min(fmin, fidelity(run.report.psi[k], exact->psi[k]));
                run.min_fidelity = fmin;
            }
            if (t != Tier::Exact && res.reference) {
                run.max_qa_error = max_relative_error(run.report.qa, res.reference->qa, cfg.tol.ratio);
                run.max_qb_error = max_relative_error(run.report.qb, res.reference->qb, cfg.tol.ratio);
            }
            if (t != Tier::Exact && run.report.multipliers && res.exact_multipliers) {
                const auto& d = *run.report.multipliers;
                const auto& e = *res.exact_multipliers;
                run.max_multiplier_error =
                    std::max({max_relative_error(d.d11, e.d11, 1e-3), max_relative_error(d.d12, e.d12, 1e-3),
                              max_relative_error(d.d21, e.d21, 1e-3), max_relative_error(d.d22, e.d22, 1e-3)});
            }
        } catch (const NearDegenerate& e) {
            run.error = e.what();
            run.error_s = e.s();
        } catch (const NumericalError& e) {
            run.error = e.what();
        }
        run.runtime_s = seconds_since(t1);
        res.runs.push_back(std::move(run));
        if (t == Tier::Exact && !res.runs.back().error) exact = &res.runs.back().report;
    }
    res.runtime_s = seconds_since(t0);
    return res;
}

std::string summary_json(const ExperimentResult& res, int indent) {
    const ExperimentConfig& c = res.config;
    const double tscale = c.physical_time();
    json j;
    j["name"] = c.name;
    json cfg;
    cfg["model"] = model_name(c.model);
    cfg["descriptor"] = res.model.descriptor;
    if (c.model == ModelKind::Ep) {
        cfg["c"] = c.ep.c;
        cfg["cycles"] = c.ep.cycles;
        cfg["center_offset"] = {c.ep.center().real(), c.ep.center().imag()};
    }
    cfg["T"] = c.ep.T;
    cfg["steps"] = c.steps;
    cfg["total_steps"] = c.total_steps();
    cfg["init"] = init_name(c.init);
    cfg["order"] = c.order;
    cfg["series_terms"] = c.series_terms;
    cfg["format"] = c.format;
    j["config"] = cfg;
    j["t_max"] = tscale;

    json tiers = json::object();
    for (const auto& r : res.runs) {
        json t;
        json tr = json::array();
        for (const auto& x : r.transitions)
            tr.push_back({{"s", x.s}, {"t", x.s * tscale}, {"from", x.from + 1}, {"to", x.to + 1}});
        t["transitions"] = tr;
        auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
        t["max_qa_rel_error"] = opt(r.max_qa_error);
        t["max_qb_rel_error"] = opt(r.max_qb_error);
        t["min_fidelity_vs_exact"] = opt(r.min_fidelity);
        t["max_multiplier_rel_error"] = opt(r.max_multiplier_error);
        const auto& d = r.report.diagnostics;
        t["flags"] = {{"series_converged", d.series_converged},
                      {"hierarchy_truncated", d.hierarchy_truncated},
                      {"initial_condition_violated", d.initial_condition_violated},
                      {"fixed_point_converged", d.fixed_point_converged}};
        if (r.tier == Tier::Exact) t["max_step_norm"] = d.max_step_norm;
        t["notes"] = d.notes;
        t["error"] = r.error ? json(*r.error) : json(nullptr);
        if (r.error_s) t["error_s"] = *r.error_s;
        t["runtime_s"] = r.runtime_s;
        tiers[tier_name(r.tier)] = t;
    }
    j["tiers"] = tiers;
    j["errors"] = res.errors;
    j["runtime_s"] = res.runtime_s;
    return j.dump(indent);
}

std::vector<std::filesystem::path> write_outputs(const ExperimentResult& res) {
    const ExperimentConfig& c = res.config;
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + c.out_dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> files;
    for (const auto& r : res.runs) {
        if (r.report.size() == 0) continue;  // failed before producing data
        const auto p = c.out_dir / (c.name + "_" + tier_name(r.tier) + "." + c.format);
        std::ofstream os(p, std::ios::binary);
        if (!os) throw ValidationError("cannot write " + p.string());
        if (c.format == "csv") write_csv(os, res, r);
        else write_series_json(os, res, r);
        files.push_back(p);
    }
    const auto sp = c.out_dir / (c.name + "_summary.json");
    std::ofstream os(sp, std::ios::binary);
    if (!os) throw ValidationError("cannot write " + sp.string());
    os << summary_json(res) << '\n';
    files.push_back(sp);
    return files;
}

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg) {
    return write_outputs(compute_experiment(cfg));
}

}  // namespace nhdyn
