#pragma once

#include "nhdyn/evolution.hpp"
#include "nhdyn/models.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nhdyn {

enum class InitKind { Amplifying, Decaying, Custom };
enum class ModelKind { Ep, AvoidedCrossing, ThreeLevel };

struct ExperimentConfig {
    std::string name = "run";
    ModelKind model = ModelKind::Ep;
    EpModelParams ep;           // c, T, cycles, center_offset (also T for the other models)
    double gap = 0.5;           // avoided crossing
    double sweep = 2.0;
    double eps = 0.3;           // three-level loop radius
    int steps = 4096;           // per cycle
    std::vector<Tier> tiers{Tier::Exact};
    InitKind init = InitKind::Decaying;
    CVector custom_init;
    std::filesystem::path out_dir = ".";
    std::string format = "csv";  // csv | json
    int order = 2;
    int series_terms = 4;
    bool multipliers = true;    // 2x2 only
    Tolerances tol = default_tolerances();

    void validate() const;
    int total_steps() const { return steps * (model == ModelKind::Ep ? ep.cycles : 1); }
    double physical_time() const;  // t at s = 1

    // Flat JSON object; unknown keys throw ValidationError.
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig from_file(const std::filesystem::path& path);
};

HamiltonianModel build_model(const ExperimentConfig& cfg);
CVector initial_state(const ExperimentConfig& cfg, const TrajectoryGrid& grid);

struct TierRun {
    Tier tier = Tier::Exact;
    EvolutionReport report;
    std::vector<double> weights;       // chi_1 branch weight (2x2)
    std::vector<Transition> transitions;
    std::optional<double> max_qa_error, max_qb_error;  // relative, vs exact-derived q
    std::optional<double> min_fidelity;                // vs exact state direction
    std::optional<double> max_multiplier_error;        // relative, where |d_exact| > 1e-3
    std::optional<std::string> error;
    std::optional<double> error_s;
    double runtime_s = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;
    HamiltonianModel model;
    TrajectoryGrid grid;
    std::vector<TierRun> runs;
    std::optional<ReferenceQ> reference;
    std::optional<MultiplierSeries> exact_multipliers;
    std::vector<std::string> errors;
    double runtime_s = 0.0;

    const TierRun* find(Tier t) const;
};

// Runs the requested tiers (the exact oracle is always included). Engine failures are recorded
// per tier rather than thrown; configuration and trajectory errors propagate.
ExperimentResult compute_experiment(const ExperimentConfig& cfg);

// compute_experiment + per-tier time series and <name>_summary.json under cfg.out_dir.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> write_outputs(const ExperimentResult& res);

std::string summary_json(const ExperimentResult& res, int indent = 2);

// Per-point table shared by every tier. Missing quantities are empty fields.
const std::vector<std::string>& csv_columns();
void write_csv(std::ostream& os, const ExperimentResult& res, const TierRun& run);
void write_series_json(std::ostream& os, const ExperimentResult& res, const TierRun& run);

// Relative deviation of |a| from |b| where |b| > floor.
double max_relative_error(const std::vector<cplx>& a, const std::vector<cplx>& b, double floor);

}  // namespace nhdyn
