#include "cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = nhdyn::cli::cli_main(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nhdyn_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Cli, SchurPrintsDecomposition) {
    const auto dir = scratch("schur");
    std::ofstream(dir / "m.json") << "[[1, [0, 1]], [0.5, 2]]";
    const auto r = cli({"schur", (dir / "m.json").string(), "--ordering", "growth", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["eigenvalues"].size(), 2u);
    EXPECT_LT(j["reconstruction_error"].get<double>(), 1e-12);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("codes");
    EXPECT_EQ(cli({}).code, 1);
    EXPECT_EQ(cli({"bogus"}).code, 1);
    EXPECT_EQ(cli({"schur", (dir / "missing.json").string()}).code, 1);
    EXPECT_EQ(cli({"evolve", "--T", "-1", "--out", dir.string()}).code, 1);
    EXPECT_EQ(cli({"evolve", "--tol", "nope=1", "--out", dir.string()}).code, 1);
    // coalescing eigenvalues are a numerical failure
    std::ofstream(dir / "jordan.json") << "[[0, 1], [0, 0]]";
    EXPECT_EQ(cli({"schur", (dir / "jordan.json").string(), "--front", "2"}).code, 2);
    EXPECT_EQ(cli({"evolve", "--model", "three_level", "--tol", "gap=0.9", "--steps", "256", "--out", dir.string()}).code, 2);
    EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, EvolveWritesRequestedTiers) {
    const auto dir = scratch("evolve");
    const auto r = cli({"evolve", "--c", "2", "--T", "10", "--cycles", "1", "--init", "decaying", "--tier", "full",
                        "--steps", "512", "--out", dir.string(), "--name", "run"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "run_exact.csv"));
    EXPECT_TRUE(fs::exists(dir / "run_full.csv"));
    EXPECT_TRUE(fs::exists(dir / "run_summary.json"));
}

TEST(Cli, FigurePresetFileNames) {
    const auto dir = scratch("fig2");
    const auto r = cli({"figure", "fig2", "--out", dir.string(), "--presets", NHDYN_PRESET_DIR});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"fig2_exact.csv", "fig2_subleading.csv", "fig2_leading.csv", "fig2_summary.json"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_EQ(cli({"figure", "fig9", "--out", dir.string()}).code, 1);
}

namespace {

nlohmann::json sweep_runs(const std::string& name) {
    const auto dir = scratch(name);
    const auto r = cli({"sweep", "--param", "T", "--values", "25,50,100", "--tier", "subleading", "--steps", "8192",
                        "--out", dir.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    std::ifstream is(dir / "sweep_summary.json");
    return nlohmann::json::parse(is)["runs"];
}

}  // namespace

TEST(Cli, SweepBranchBErrorDecreasesWithT) {
    const auto runs = sweep_runs("sweep_b");
    ASSERT_EQ(runs.size(), 3u);
    double prev = 1e300;
    for (const auto& run : runs) {
        const double e = run["max_qb_rel_error"].get<double>();
        EXPECT_LT(e, prev) << run["T"];
        prev = e;
    }
}

TEST(Cli, SweepErrorDecreasesWithT) {
    // the T = 100 run has its sudden transition inside the window; q_a jumps there
    const auto runs = sweep_runs("sweep_q");
    ASSERT_EQ(runs.size(), 3u);
    double prev = 1e300;
    for (const auto& run : runs) {
        const double e = run["max_q_rel_error"].get<double>();
        EXPECT_LT(e, prev) << run["T"];
        prev = e;
    }
}
