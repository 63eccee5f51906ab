#include "cli.hpp"

#include "nhdyn/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#ifndef NHDYN_PRESET_DIR
#define NHDYN_PRESET_DIR "presets"
#endif

namespace nhdyn::cli {

namespace {

using json = nlohmann::ordered_json;

struct RunFlags {
    std::string model = "ep";
    double c = 2.0;
    double T = 50.0;
    int cycles = 1;
    std::string init = "decaying";
    std::vector<std::string> tiers;
    int steps = 4096;
    int order = 2;
    std::string format = "csv";
    std::vector<std::string> tol;
    std::string out = ".";
    std::string name;
};

void add_common(CLI::App* app, RunFlags& f, bool with_model) {
    if (with_model) {
        app->add_option("--model", f.model, "ep | avoided_crossing | three_level")
            ->check(CLI::IsMember({"ep", "avoided_crossing", "three_level"}));
        app->add_option("--c", f.c, "coupling constant");
        app->add_option("--T", f.T, "time per cycle");
        app->add_option("--cycles", f.cycles, "loops around the exceptional point");
        app->add_option("--init", f.init, "amplifying | decaying")->check(CLI::IsMember({"amplifying", "decaying"}));
    }
    app->add_option("--steps", f.steps, "grid steps per cycle")->capture_default_str();
    app->add_option("--order", f.order, "Riccati hierarchy depth for the full tier")->capture_default_str();
    app->add_option("--format", f.format, "series format")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--tol", f.tol, "tolerance override name=value (repeatable)");
    app->add_option("--out", f.out, "output directory");
}

void apply_tolerances(Tolerances& t, const std::vector<std::string>& items) {
    for (const auto& it : items) {
        const auto eq = it.find('=');
        if (eq == std::string::npos) throw ValidationError("--tol expects name=value, got '" + it + "'");
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(it.substr(eq + 1), &used);
            if (used != it.size() - eq - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError("--tol: bad value in '" + it + "'");
        }
        set_tolerance(t, it.substr(0, eq), v);
    }
}

ExperimentConfig config_from_flags(const RunFlags& f) {
    ExperimentConfig cfg;
    cfg.name = f.name.empty() ? "evolve" : f.name;
    if (f.model == "ep") cfg.model = ModelKind::Ep;
    else if (f.model == "avoided_crossing") cfg.model = ModelKind::AvoidedCrossing;
    else cfg.model = ModelKind::ThreeLevel;
    cfg.ep.c = f.c;
    cfg.ep.T = f.T;
    cfg.ep.cycles = f.cycles;
    cfg.init = f.init == "amplifying" ? InitKind::Amplifying : InitKind::Decaying;
    cfg.tiers.clear();
    for (const auto& t : f.tiers) cfg.tiers.push_back(parse_tier(t));
    if (cfg.tiers.empty()) cfg.tiers.push_back(Tier::Exact);
    cfg.steps = f.steps;
    cfg.order = f.order;
    cfg.format = f.format;
    cfg.out_dir = f.out;
    cfg.multipliers = cfg.model != ModelKind::ThreeLevel;
    apply_tolerances(cfg.tol, f.tol);
    cfg.validate();
    return cfg;
}

int report_run(const ExperimentResult& res, const std::vector<std::filesystem::path>& files, std::ostream& out,
               std::ostream& err) {
    for (const auto& p : files) out << p.string() << '\n';
    int code = kOk;
    for (const auto& r : res.runs) {
        if (r.error) {
            err << tier_name(r.tier) << ": " << *r.error << '\n';
            code = kNumerical;
        }
        for (const auto& x : r.transitions)
            out << tier_name(r.tier) << ": transition " << x.from + 1 << " -> " << x.to + 1 << " at t = "
                << std::setprecision(6) << x.s * res.config.physical_time() << '\n';
    }
    for (const auto& e : res.errors) {
        err << e << '\n';
        code = kNumerical;
    }
    return code;
}

std::filesystem::path preset_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("NHDYN_PRESETS")) return env;
    return NHDYN_PRESET_DIR;
}

cplx json_complex(const json& v) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ValidationError("matrix entries must be numbers or [re, im]");
}

CMatrix read_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open matrix file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("matrix file: ") + e.what());
    }
    if (j.is_object()) {
        if (!j.contains("matrix") || j.size() != 1) throw ValidationError("matrix file: expected {\"matrix\": [...]}");
        j = j["matrix"];
    }
    if (!j.is_array() || j.empty()) throw ValidationError("matrix file: expected a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    CMatrix H(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            throw ValidationError("matrix file: matrix must be square");
        for (Eigen::Index c = 0; c < n; ++c) H(r, c) = json_complex(row[static_cast<std::size_t>(c)]);
    }
    if (!H.allFinite()) throw ValidationError("matrix file: non-finite entry");
    return H;
}

json matrix_json(const CMatrix& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back({M(r, c).real(), M(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

void print_matrix(std::ostream& out, const char* label, const CMatrix& M) {
    out << label << ":\n";
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            const cplx z = M(r, c);
            out << (c ? "  " : "  ") << std::showpos << std::scientific << std::setprecision(6) << z.real()
                << z.imag() << "i" << std::noshowpos;
        }
        out << '\n';
    }
    out << std::defaultfloat;
}

int run_schur(const std::string& file, const std::string& ordering, int front, const std::string& format,
              const std::vector<std::string>& tol, std::ostream& out) {
    Tolerances t = default_tolerances();
    apply_tolerances(t, tol);
    const CMatrix H = read_matrix(file);
    const auto sd = schur_decompose(H, t.recon, t);
    OrderedSchur os{sd, OrderTag::Raw, 0, 0};
    if (ordering == "growth" || front > 0) os = growth_order(sd, t);
    if (front > 0) {
        if (front > H.rows()) throw ValidationError("--front out of range");
        os = bring_to_front(os, front - 1, t);
    }
    const auto& b = os.base;
    if (format == "json") {
        json j;
        json ev = json::array();
        for (const auto& l : b.eigenvalues) ev.push_back({l.real(), l.imag()});
        j["eigenvalues"] = ev;
        j["U"] = matrix_json(b.unitary);
        j["A"] = matrix_json(b.triangular);
        j["unitarity_error"] = unitarity_error(b.unitary);
        j["reconstruction_error"] = (b.unitary * b.triangular * b.unitary.adjoint() - H).norm() / H.norm();
        out << j.dump(2) << '\n';
    } else {
        out << "eigenvalues:\n";
        for (const auto& l : b.eigenvalues)
            out << "  " << std::setprecision(12) << l.real() << (l.imag() < 0 ? " - " : " + ") << std::abs(l.imag())
                << "i\n";
        print_matrix(out, "U", b.unitary);
        print_matrix(out, "A", b.triangular);
    }
    return kOk;
}

struct SweepPoint {
    double value = 0.0;
    std::optional<ExperimentResult> result;
    std::string error;
    int code = kOk;
};

int run_sweep(const RunFlags& base, const std::string& param, const std::vector<double>& values,
              const std::string& tier, std::ostream& out) {
    if (values.empty()) throw ValidationError("sweep: --values is empty");
    const Tier t = parse_tier(tier);
    if (t == Tier::Exact) throw ValidationError("sweep: choose an approximate tier");

    std::vector<ExperimentConfig> cfgs;
    for (double v : values) {
        RunFlags f = base;
        f.tiers = {"exact", tier};
        if (param == "T") f.T = v;
        else f.c = v;
        auto cfg = config_from_flags(f);
        cfg.multipliers = false;
        cfgs.push_back(cfg);
    }

    std::vector<std::future<SweepPoint>> jobs;
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        jobs.push_back(std::async(std::launch::async, [&cfgs, &values, i] {
            SweepPoint p;
            p.value = values[i];
            try {
                p.result = compute_experiment(cfgs[i]);
            } catch (const ValidationError& e) {
                p.error = e.what();
                p.code = kValidation;
            } catch (const std::exception& e) {
                p.error = e.what();
                p.code = kNumerical;
            }
            return p;
        }));
    }

    json runs = json::array();
    int code = kOk;
    out << param << "\tmax_rel_err_qa\tmax_rel_err_qb\tmin_fidelity\n";
    for (auto& j : jobs) {
        SweepPoint p = j.get();
        json r;
        r[param] = p.value;
        if (!p.result) {
            r["error"] = p.error;
            code = std::max(code, p.code);
            out << p.value << "\terror: " << p.error << '\n';
            runs.push_back(r);
            continue;
        }
        const TierRun* run = p.result->find(t);
        auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
        r["max_qa_rel_error"] = opt(run->max_qa_error);
        r["max_qb_rel_error"] = opt(run->max_qb_error);
        std::optional<double> mq;
        if (run->max_qa_error && run->max_qb_error) mq = std::max(*run->max_qa_error, *run->max_qb_error);
        r["max_q_rel_error"] = opt(mq);
        r["min_fidelity_vs_exact"] = opt(run->min_fidelity);
        json tr = json::array();
        for (const auto& x : run->transitions)
            tr.push_back({{"t", x.s * p.result->config.physical_time()}, {"from", x.from + 1}, {"to", x.to + 1}});
        r["transitions"] = tr;
        r["error"] = run->error ? json(*run->error) : json(nullptr);
        if (run->error) code = std::max(code, static_cast<int>(kNumerical));
        runs.push_back(r);
        out << std::setprecision(6) << p.value << '\t' << (run->max_qa_error ? *run->max_qa_error : NAN) << '\t'
            << (run->max_qb_error ? *run->max_qb_error : NAN) << '\t'
            << (run->min_fidelity ? *run->min_fidelity : NAN) << '\n';
    }
    json s;
    s["param"] = param;
    s["tier"] = tier;
    s["steps"] = base.steps;
    s["runs"] = runs;
    std::filesystem::create_directories(base.out);
    const auto path = std::filesystem::path(base.out) / "sweep_summary.json";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write " + path.string());
    os << s.dump(2) << '\n';
    out << path.string() << '\n';
    return code;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError("--values: cannot parse '" + item + "'");
        }
    }
    return v;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Non-Hermitian adiabatic dynamics: Schur-basis evolution engines and experiments", "nhdyn"};
    app.require_subcommand(1);

    // schur
    auto* schur = app.add_subcommand("schur", "Schur-decompose a matrix read from a JSON file");
    std::string matrix_file, ordering = "raw", schur_format = "text";
    int front = 0;
    std::vector<std::string> schur_tol;
    schur->add_option("file", matrix_file, "JSON file: [[a, [re, im], ...], ...]")->required();
    schur->add_option("--ordering", ordering, "raw | growth")->check(CLI::IsMember({"raw", "growth"}));
    schur->add_option("--front", front, "bring eigenvalue j (1-based, growth order) to the front");
    schur->add_option("--format", schur_format, "text | json")->check(CLI::IsMember({"text", "json"}));
    schur->add_option("--tol", schur_tol, "tolerance override name=value");

    // evolve
    RunFlags ev;
    auto* evolve = app.add_subcommand("evolve", "Run one experiment from flags");
    add_common(evolve, ev, true);
    evolve->add_option("--tier", ev.tiers, "exact | leading | subleading | full (repeatable)")
        ->check(CLI::IsMember({"exact", "leading", "subleading", "full"}));
    evolve->add_option("--name", ev.name, "output file stem");

    // figure
    RunFlags fig;
    std::string figure_name, presets;
    auto* figure = app.add_subcommand("figure", "Run a shipped preset");
    figure->add_option("which", figure_name, "fig1 | fig2 | fig3 | fig4")
        ->required()
        ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4"}));
    add_common(figure, fig, false);
    figure->add_option("--presets", presets, "directory holding <fig>.json");

    // sweep
    RunFlags sw;
    std::string param = "T", values_text, sweep_tier = "subleading";
    auto* sweep = app.add_subcommand("sweep", "Vary T or c and compare one tier against the exact oracle");
    add_common(sweep, sw, true);
    sweep->add_option("--param", param, "T | c")->check(CLI::IsMember({"T", "c"}));
    sweep->add_option("--values", values_text, "comma-separated values")->required();
    sweep->add_option("--tier", sweep_tier, "approximate tier")
        ->check(CLI::IsMember({"leading", "subleading", "full"}));

    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.emplace_back("nhdyn");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        if (*schur) return run_schur(matrix_file, ordering, front, schur_format, schur_tol, out);
        if (*evolve) {
            const auto cfg = config_from_flags(ev);
            const auto res = compute_experiment(cfg);
            return report_run(res, write_outputs(res), out, err);
        }
        if (*figure) {
            auto cfg = ExperimentConfig::from_file(preset_dir(presets) / (figure_name + ".json"));
            if (figure->count("--steps")) cfg.steps = fig.steps;
            if (figure->count("--order")) cfg.order = fig.order;
            if (figure->count("--format")) cfg.format = fig.format;
            cfg.out_dir = fig.out;
            apply_tolerances(cfg.tol, fig.tol);
            cfg.validate();
            const auto res = compute_experiment(cfg);
            return report_run(res, write_outputs(res), out, err);
        }
        if (*sweep) return run_sweep(sw, param, parse_values(values_text), sweep_tier, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
    return kValidation;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace nhdyn::cli
