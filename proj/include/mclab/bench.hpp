#pragma once

// Experiment harness: JSON experiment configs, seeded trial replication,
// solver timing and CSV persistence. docs/experiments.md lists the
// experiment kinds and their config keys.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mclab/adaptive.hpp"
#include "mclab/core.hpp"
#include "mclab/costmodel.hpp"
#include "mclab/passive.hpp"
#include "mclab/synth.hpp"

namespace mclab::bench {

enum class ExperimentKind {
    size_sweep,           // grid over n = m, MCAR mask at p_obs
    c_sweep,              // grid over C, |Ω| = theoretical_budget(n, r, C)
    consistent_hardness,  // grid over n, |Ω| = theoretical_budget(n, r, C)
    coherence_sweep,      // grid over alpha, MCAR mask at p_obs
    rowprop_sweep,        // grid over p_row, column-space adaptive completion
    acquisition,          // cost-model trajectories (grid: cost model names)
    movielens_cv,         // rank cross-validation on u.data
};

ExperimentKind parse_experiment(std::string_view name);
std::string_view experiment_name(ExperimentKind kind);
// "n", "C", "alpha" or "p_row".
std::string_view grid_param(ExperimentKind kind);

struct SolverSpec {
    std::string name;  // svt | altmin | adaptive-column | two-phase
    passive::SvtConfig svt;      // tau <= 0 means 5(n+m)/2 per instance
    passive::AltMinConfig altmin;  // rank <= 0 means the instance rank
    adaptive::ColumnSpaceConfig column;
    double phase1_fraction = 0.3;
};

struct InstanceSpec {
    int n = 100;
    int m = 100;
    int r = 5;
    synth::Kind kind = synth::Kind::gaussian_lowrank;
    double alpha = 0.0;
    double sigma = 0.0;
    double p_obs = 0.3;
    double C = 2.0;
};

struct AcquisitionSpec {
    int steps = 1000;
    costmodel::PricingRule pricing;
    bool complete = true;  // run AltMin on the final mask and report unseen RMSE
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::size_sweep;
    std::vector<double> grid;             // numeric kinds
    std::vector<std::string> grid_labels; // acquisition: cost model names
    int trials = 10;
    std::uint64_t base_seed = 0;
    InstanceSpec instance;
    std::vector<SolverSpec> solvers;
    AcquisitionSpec acquisition;
    // movielens-cv
    std::filesystem::path data;
    std::vector<int> ranks;
    int folds = 5;
    std::filesystem::path output = "results";

    void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Independent stream for (seed, purpose); splitmix64 finaliser.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct TrialResult {
    int grid_index = 0;
    double grid_value = 0.0;
    int trial = 0;
    std::string solver;
    double rmse = 0.0;  // NaN when the solver failed
    double seconds = 0.0;
    std::optional<long long> iterations;
    std::optional<long long> samples_used;
    std::optional<long long> basis_size;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

struct AggregateRow {
    double grid_value = 0.0;
    std::string solver;
    double rmse_mean = 0.0;
    double rmse_std = 0.0;
    double seconds_mean = 0.0;
    double seconds_std = 0.0;
};

struct SweepTable {
    std::string experiment;
    std::string grid_param;
    std::vector<TrialResult> rows;  // ordered by (grid point, trial, solver)

    // Mean and sample std (n - 1) over successful rows; std is 0 for one trial.
    std::vector<AggregateRow> aggregate() const;
};

inline constexpr std::string_view kResultsHeader =
    "experiment,grid_param,grid_value,solver,trial,rmse,seconds,iterations,samples_used,basis_size,status";
inline constexpr std::string_view kAggregateHeader = "grid_value,solver,rmse_mean,rmse_std,seconds_mean,seconds_std";

// One trial: the same seed reproduces the same instance, mask and result.
struct TrialInstance {
    Matrix truth;
    IndexSet mask;  // empty for rowprop-sweep
    std::uint64_t seed = 0;
};
TrialInstance make_instance(const ExperimentConfig& cfg, double grid_value, int trial);

TrialResult run_solver(const ExperimentConfig& cfg, const SolverSpec& solver, const TrialInstance& inst);

// Numeric experiment kinds only; failures become rows with an error status.
SweepTable run_sweep(const ExperimentConfig& cfg);

// Writes `path` and `<stem>_aggregate.csv` next to it.
void write_results(const SweepTable& table, const std::filesystem::path& path);
std::filesystem::path aggregate_path(const std::filesystem::path& results_path);
SweepTable read_results(const std::filesystem::path& path);

// Cost-model experiment: truth M = U V^T, revealed values from Y = M + sigma Z,
// MCAR initial mask (top-left biased for C3).
struct AcquisitionRun {
    Matrix truth;       // noiseless M
    Matrix observed;    // Y = M + sigma Z
    IndexSet mask0;
    costmodel::CostField costs;
    costmodel::Trajectory trajectory;
    std::optional<double> completion_rmse;
};

AcquisitionRun run_acquisition_experiment(const InstanceSpec& inst, costmodel::CostTag model,
                                          const AcquisitionSpec& spec, std::uint64_t seed);

// ledger.csv plus field_{costs,S_initial,U_initial,S_final,U_final}.csv in dir.
void write_trajectory(const AcquisitionRun& run, const std::filesystem::path& dir);

struct AcquisitionSummary {
    std::string model;
    int trial = 0;
    std::uint64_t seed = 0;
    int steps = 0;
    double total_cost = 0.0;
    std::optional<double> completion_rmse;
};

inline constexpr std::string_view kAcquisitionHeader = "model,trial,seed,steps,total_cost,mean_step_cost,completion_rmse";

// Every (cost model, trial) pair of an acquisition config, seed = base_seed + trial.
// Trajectories go to out/<model>/trial_<t>/, the summary to out/acquisition_summary.csv.
std::vector<AcquisitionSummary> run_acquisition_suite(const ExperimentConfig& cfg, const std::filesystem::path& out);

}  // namespace mclab::bench
