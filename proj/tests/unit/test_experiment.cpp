#include "nhdyn/experiment.hpp"
#include "nhdyn/models.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nhdyn;
namespace fs = std::filesystem;

namespace {

const cplx I(0.0, 1.0);

std::vector<std::vector<std::string>> read_csv(std::istream& is) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string csv_of(const ExperimentResult& res, Tier t) {
    std::ostringstream os;
    write_csv(os, res, *res.find(t));
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nhdyn_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Models, EpEigenvaluesFrozen) {
    EpModelParams p;
    const auto [l1, l2] = ep_eigenvalues(p, 0.3);
    EXPECT_LT(std::abs(l1 - cplx(1.7406568176539234537, 0.18621784565238977079)), 1e-12);
    EXPECT_LT(std::abs(l1 + l2), 1e-15);
}

TEST(Models, EpEigenvaluesMatchSchur) {
    EpModelParams p;
    p.c = 1.5;
    const auto m = ep_model(p);
    for (double s : {0.0, 0.13, 0.5, 0.77}) {
        const auto [l1, l2] = ep_eigenvalues(p, s);
        const auto ev = schur_decompose(m.eval(s)).eigenvalues;
        const double d = std::min(std::abs(ev[0] - l1) + std::abs(ev[1] - l2), std::abs(ev[0] - l2) + std::abs(ev[1] - l1));
        EXPECT_LT(d, 1e-9) << s;
    }
}

TEST(Models, EpLoopAndTimescale) {
    EpModelParams p;
    p.T = 30.0;
    p.cycles = 2;
    EXPECT_LT(std::abs(ep_loop_point(p, 0.0) - cplx(1.0, -2.0)), 1e-15);
    EXPECT_LT(std::abs(ep_loop_point(p, 0.25) - cplx(-1.0, -2.0)), 1e-12);
    EXPECT_DOUBLE_EQ(ep_model(p).timescale, 60.0);
    p.cycles = 0;
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Models, OtherModelsAreWellFormed) {
    const auto ac = avoided_crossing_model(0.5, 2.0, 10.0);
    const CMatrix H = ac.eval(0.25);
    EXPECT_LT((H - H.adjoint()).norm(), 1e-15);
    const auto tl = three_level_model(50.0);
    EXPECT_EQ(tl.dim, 3);
    const auto ev = growth_order(schur_decompose(tl.eval(0.4))).base.eigenvalues;
    // well-separated imaginary parts
    EXPECT_GT(ev[0].imag() - ev[1].imag(), 0.3);
    EXPECT_GT(ev[1].imag() - ev[2].imag(), 0.3);
    EXPECT_THROW(three_level_model(-1.0), ValidationError);
}

TEST(StateRatio, Cases) {
    CVector v(2);
    v << 2.0, cplx(1.0, -3.0);
    const auto r = state_ratio(v);
    EXPECT_DOUBLE_EQ(r.x, 0.5);
    EXPECT_DOUBLE_EQ(r.y, -1.5);
    v << 0.0, 1.0;
    EXPECT_THROW(state_ratio(v), NumericalError);
    EXPECT_THROW(state_ratio(CVector::Ones(3)), ValidationError);
}

TEST(Config, ParsesAndRejects) {
    const auto cfg = ExperimentConfig::from_json(
        R"({"name": "x", "c": 1.5, "T": 20, "cycles": 2, "tiers": ["exact", "full"], "init": "amplifying",
            "steps": 512, "order": 3, "tol_series": 1e-4, "center_offset": [0.1, -1.5]})");
    EXPECT_EQ(cfg.ep.cycles, 2);
    EXPECT_EQ(cfg.total_steps(), 1024);
    EXPECT_DOUBLE_EQ(cfg.physical_time(), 40.0);
    EXPECT_EQ(cfg.order, 3);
    EXPECT_DOUBLE_EQ(cfg.tol.series, 1e-4);
    EXPECT_LT(std::abs(cfg.ep.center() - cplx(0.1, -1.5)), 1e-15);
    EXPECT_EQ(cfg.init, InitKind::Amplifying);

    EXPECT_THROW(ExperimentConfig::from_json(R"({"bogus": 1})"), ValidationError);
    EXPECT_THROW(ExperimentConfig::from_json(R"({"steps": 8})"), ValidationError);
    EXPECT_THROW(ExperimentConfig::from_json(R"({"T": -3})"), ValidationError);
    EXPECT_THROW(ExperimentConfig::from_json(R"({"tiers": ["fast"]})"), ValidationError);
    EXPECT_THROW(ExperimentConfig::from_json(R"({"tol_nope": 1})"), ValidationError);
    EXPECT_THROW(ExperimentConfig::from_json("{not json"), ValidationError);
    EXPECT_THROW(ExperimentConfig::from_file("/nonexistent/cfg.json"), ValidationError);
}

TEST(Config, CustomInitialVector) {
    auto cfg = ExperimentConfig::from_json(R"({"init": "custom", "init_vector": [[1, 0], [0, 1]], "steps": 256})");
    const auto g = sample_trajectory(build_model(cfg), 1.0, 256);
    const CVector v = initial_state(cfg, g);
    EXPECT_LT(std::abs(v(1) / v(0) - I), 1e-15);
    EXPECT_THROW(ExperimentConfig::from_json(R"({"init": "custom", "init_vector": [[1, 0]]})"), ValidationError);
}

TEST(Experiment, ExactMatchesIndependentOdeOracle) {
    // DOP853 at rtol 1e-12, decaying start, c = 2, T = 5
    auto cfg = ExperimentConfig::from_json(R"({"T": 5, "steps": 4096, "tiers": ["exact"], "multipliers": false})");
    const auto res = compute_experiment(cfg);
    const auto& ex = res.find(Tier::Exact)->report;
    const std::size_t k = ex.size() - 1;
    const CVector psi = ex.state(k);
    EXPECT_LT(std::abs(psi(1) / psi(0) - cplx(-1.022231518581415, 1.7761273676672562)), 1e-5);
    EXPECT_NEAR(psi.norm() / ex.state(0).norm(), 110.75992637867874, 110.76 * 1e-5);
}

TEST(Experiment, DeterministicOutput) {
    auto cfg = ExperimentConfig::from_json(R"({"T": 10, "steps": 512, "tiers": ["exact", "subleading", "full"]})");
    const auto a = compute_experiment(cfg);
    const auto b = compute_experiment(cfg);
    for (Tier t : {Tier::Exact, Tier::Subleading, Tier::Full}) EXPECT_EQ(csv_of(a, t), csv_of(b, t));
}

TEST(Experiment, ExactStateConvergedInSteps) {
    auto cfg = ExperimentConfig::from_json(R"({"T": 5, "steps": 8192, "tiers": ["exact"], "multipliers": false})");
    const auto a = compute_experiment(cfg);
    cfg.steps = 16384;
    const auto b = compute_experiment(cfg);
    const auto& ra = a.find(Tier::Exact)->report;
    const auto& rb = b.find(Tier::Exact)->report;
    for (std::size_t k = 0; k < ra.size(); k += 64) {
        const auto za = state_ratio(ra.psi[k]).z, zb = state_ratio(rb.psi[2 * k]).z;
        EXPECT_LT(std::abs(za - zb), 1e-6) << k;
    }
}

TEST(Experiment, GoldenCsv) {
    const fs::path dir = NHDYN_TEST_DATA;
    const auto cfg = ExperimentConfig::from_file(dir / "golden.json");
    const auto res = compute_experiment(cfg);
    for (Tier t : {Tier::Exact, Tier::Subleading}) {
        std::ifstream gs(dir / (std::string("golden_") + tier_name(t) + ".csv"));
        ASSERT_TRUE(gs) << tier_name(t);
        std::istringstream ns(csv_of(res, t));
        const auto want = read_csv(gs);
        const auto got = read_csv(ns);
        ASSERT_EQ(want.size(), got.size());
        EXPECT_EQ(want.front(), got.front());
        EXPECT_EQ(got.front(), csv_columns());
        for (std::size_t r = 1; r < want.size(); ++r) {
            ASSERT_EQ(want[r].size(), got[r].size()) << r;
            for (std::size_t c = 0; c < want[r].size(); ++c) {
                ASSERT_EQ(want[r][c].empty(), got[r][c].empty()) << r << "," << c;
                if (want[r][c].empty()) continue;
                const double w = std::stod(want[r][c]), g = std::stod(got[r][c]);
                EXPECT_LE(std::abs(w - g), 1e-9 * std::max(1.0, std::abs(w))) << tier_name(t) << " row " << r << " col " << want[0][c];
            }
        }
    }
}

TEST(Experiment, SubleadingErrorMetrics) {
    auto cfg = ExperimentConfig::from_json(R"({"T": 50, "steps": 4096, "tiers": ["subleading", "full"]})");
    const auto res = compute_experiment(cfg);
    ASSERT_NE(res.find(Tier::Exact), nullptr);
    const auto* sub = res.find(Tier::Subleading);
    const auto* full = res.find(Tier::Full);
    ASSERT_TRUE(sub->max_qa_error && full->max_qa_error);
    // one more hierarchy order reduces the q error
    EXPECT_LT(*full->max_qa_error, *sub->max_qa_error);
    EXPECT_GT(*full->min_fidelity, 0.99);
}

TEST(Experiment, WritesFilesAndSummary) {
    auto cfg = ExperimentConfig::from_json(R"({"name": "w", "T": 10, "steps": 1024, "tiers": ["exact", "leading"]})");
    cfg.out_dir = scratch("write");
    const auto files = run_experiment(cfg);
    for (const char* f : {"w_exact.csv", "w_leading.csv", "w_summary.json"}) EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / f)) << f;
    EXPECT_EQ(files.size(), 3u);
    std::ifstream is(fs::path(cfg.out_dir) / "w_summary.json");
    const auto j = nlohmann::json::parse(is);
    EXPECT_EQ(j["name"], "w");
    EXPECT_TRUE(j.contains("tiers"));
    EXPECT_DOUBLE_EQ(j["t_max"].get<double>(), 10.0);

    cfg.format = "json";
    cfg.name = "wj";
    run_experiment(cfg);
    std::ifstream js(fs::path(cfg.out_dir) / "wj_exact.json");
    const auto series = nlohmann::json::parse(js);
    EXPECT_EQ(series["tier"], "exact");
    EXPECT_EQ(series["columns"].size(), csv_columns().size());
    EXPECT_TRUE(series["rows"][0]["abs_d11"].is_null() || series["rows"][0]["abs_d11"].is_number());
}

TEST(Experiment, MaxRelativeError) {
    const std::vector<cplx> a{1.0, 2.0, 1e-9}, b{1.0, 2.2, 1e-12};
    EXPECT_NEAR(max_relative_error(a, b, 1e-6), 0.2 / 2.2, 1e-15);
}
