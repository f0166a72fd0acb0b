// mclab command line: synthetic data, single solves, sweeps, acquisition
// trajectories and MovieLens cross-validation.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mclab/adaptive.hpp"
#include "mclab/bench.hpp"
#include "mclab/io.hpp"
#include "mclab/kernels.hpp"
#include "mclab/movielens.hpp"
#include "mclab/passive.hpp"
#include "mclab/synth.hpp"

namespace fs = std::filesystem;
using namespace mclab;

namespace {

struct SynthArgs {
    int n = 100;
    int m = 0;
    int r = 5;
    std::string kind = "gaussian-lowrank";
    double alpha = 0.0;
    double sigma = 0.0;
    double p_obs = 0.3;
    std::optional<double> C;
    std::uint64_t seed = 0;
    fs::path out = "synth";
};

struct RunArgs {
    fs::path matrix;
    fs::path mask;
    std::optional<fs::path> truth;
    std::string solver = "altmin";
    int rank = 5;
    double tau = 0.0;
    int max_iters = 0;
    fs::path out = "estimate.csv";
};

struct SweepArgs {
    fs::path config;
    std::optional<fs::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
};

struct MovielensArgs {
    std::optional<fs::path> config;
    std::optional<fs::path> data;
    int folds = 5;
    std::string ranks = "1..30";
    fs::path out = "movielens";
    std::uint64_t seed = 0;
    bool clip = false;
    bool heatmap = false;
    int max_iters = 50;
};

void cmd_synth(const SynthArgs& a) {
    const int m = a.m > 0 ? a.m : a.n;
    const synth::SynthSpec spec{a.n, m, a.r, synth::parse_kind(a.kind), a.alpha, a.sigma, a.seed};
    const Matrix y = synth::generate(spec);
    const std::uint64_t mask_seed = bench::derive_seed(a.seed, 1);
    const IndexSet mask = a.C ? synth::mask_budget(a.n, m, synth::theoretical_budget(a.n, a.r, *a.C), mask_seed)
                              : synth::mask_mcar(a.n, m, a.p_obs, mask_seed);
    fs::create_directories(a.out);
    io::write_matrix_csv(y, a.out / "matrix.csv");
    io::write_mask(mask, a.out / "mask.csv");
    std::cout << "wrote " << (a.out / "matrix.csv").string() << " (" << a.n << "x" << m << ") and "
              << (a.out / "mask.csv").string() << " (|Omega|=" << mask.size() << ")\n";
}

void cmd_run(const RunArgs& a) {
    const Matrix y = io::read_matrix_csv(a.matrix);
    const IndexSet mask = io::read_mask(a.mask, static_cast<int>(y.rows()), static_cast<int>(y.cols()));
    const MaskedMatrix obs = MaskedMatrix::from_dense(y, mask);
    passive::Completion done;
    if (a.solver == "svt") {
        auto cfg = passive::SvtConfig::defaults_for(obs.rows(), obs.cols());
        if (a.tau > 0.0) cfg.tau = a.tau;
        if (a.max_iters > 0) cfg.max_iters = a.max_iters;
        done = passive::svt_complete(obs, cfg);
    } else if (a.solver == "altmin") {
        passive::AltMinConfig cfg;
        cfg.rank = a.rank;
        if (a.max_iters > 0) cfg.max_iters = a.max_iters;
        done = passive::altmin_complete(obs, cfg);
    } else {
        throw Error("run: unknown solver '" + a.solver + "' (svt or altmin)");
    }
    if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
    io::write_matrix_csv(done.estimate, a.out);
    std::cout << "solver=" << a.solver << " iterations=" << done.trace.iters_used
              << " converged=" << (done.trace.converged ? "yes" : "no");
    if (a.truth) {
        const Matrix truth = io::read_matrix_csv(*a.truth);
        std::cout << " rmse_unseen=" << io::format_double(rmse_unseen(truth, done.estimate, mask));
    }
    std::cout << '\n';
}

bench::ExperimentConfig load_with_overrides(const SweepArgs& a) {
    auto cfg = bench::load_config(a.config);
    if (a.seed) cfg.base_seed = *a.seed;
    if (a.trials) cfg.trials = *a.trials;
    if (a.out) cfg.output = *a.out;
    cfg.validate();
    return cfg;
}

void cmd_sweep(const SweepArgs& a) {
    const auto cfg = load_with_overrides(a);
    const auto table = bench::run_sweep(cfg);
    const fs::path path = cfg.output / (table.experiment + ".csv");
    bench::write_results(table, path);
    std::size_t failed = 0;
    for (const auto& r : table.rows) failed += r.ok() ? 0 : 1;
    std::cout << "wrote " << path.string() << " (" << table.rows.size() << " rows, " << failed << " failed) and "
              << bench::aggregate_path(path).string() << '\n';
}

void cmd_acquire(const SweepArgs& a) {
    const auto cfg = load_with_overrides(a);
    const auto rows = bench::run_acquisition_suite(cfg, cfg.output);
    std::cout << "wrote " << rows.size() << " trajectories under " << cfg.output.string() << '\n';
}

void cmd_movielens(MovielensArgs a) {
    std::vector<int> ranks;
    if (a.config) {
        const auto cfg = bench::load_config(*a.config);
        if (cfg.kind != bench::ExperimentKind::movielens_cv) throw Error("movielens: config is not movielens-cv");
        if (!a.data && !cfg.data.empty()) a.data = cfg.data;
        a.folds = cfg.folds;
        a.seed = cfg.base_seed;
        ranks = cfg.ranks;
    } else {
        ranks = movielens::parse_rank_grid(a.ranks);
    }
    if (!a.data) throw Error("movielens: --data <u.data> is required");
    const auto records = movielens::parse_udata(*a.data);
    const MaskedMatrix obs = movielens::build_matrix(records);
    std::cout << "ratings=" << records.size() << " users=" << obs.rows() << " items=" << obs.cols() << '\n';
    passive::AltMinConfig cfg;
    cfg.max_iters = a.max_iters;
    const auto table = movielens::crossval_rank(obs, ranks, cfg, {a.folds, a.clip, a.seed});
    movielens::write_cv(table, a.out);
    if (a.heatmap) {
        movielens::export_heatmap(obs, 0, std::min(200, obs.rows()), 0, std::min(200, obs.cols()),
                                  a.out / "heatmap_subset.csv");
        movielens::export_heatmap(obs, 0, obs.rows(), 0, obs.cols(), a.out / "heatmap_full.csv");
    }
    const auto& best = table.best();
    std::cout << "best rank=" << best.rank << " test_rmse=" << io::format_double(best.test_mean) << '\n';
}

void add_sweep_flags(CLI::App* cmd, SweepArgs& a) {
    cmd->add_option("--config", a.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", a.out, "Output directory (overrides the config)");
    cmd->add_option("--seed", a.seed, "Base seed (overrides the config)");
    cmd->add_option("--trials", a.trials, "Trials per grid point (overrides the config)")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mclab: low-rank matrix completion experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "mclab 0.1.0");
    bool show_isa = false;
    app.add_flag("--isa", show_isa, "Print the active kernel ISA to stderr");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic matrix and observation mask");
    synth_cmd->add_option("--kind", synth_args.kind, "gaussian-lowrank | powerlaw | block-row-coherent");
    synth_cmd->add_option("--n", synth_args.n, "Rows")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--m", synth_args.m, "Columns (default n)");
    synth_cmd->add_option("--r", synth_args.r, "Rank")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--alpha", synth_args.alpha, "Power-law exponent or block magnitude");
    synth_cmd->add_option("--sigma", synth_args.sigma, "Noise standard deviation");
    synth_cmd->add_option("--p-obs", synth_args.p_obs, "MCAR observation probability");
    synth_cmd->add_option("--C", synth_args.C, "Use a budget mask of round(C r n ln(n)^2) entries instead");
    synth_cmd->add_option("--seed", synth_args.seed, "Seed");
    synth_cmd->add_option("--out", synth_args.out, "Output directory");

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Complete one matrix with one solver");
    run_cmd->add_option("--matrix", run_args.matrix, "Matrix CSV (unobserved values ignored)")
        ->required()
        ->check(CLI::ExistingFile);
    run_cmd->add_option("--mask", run_args.mask, "Mask file of i,j pairs")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--truth", run_args.truth, "Ground truth CSV; prints rmse_unseen")->check(CLI::ExistingFile);
    run_cmd->add_option("--solver", run_args.solver, "svt | altmin");
    run_cmd->add_option("--rank", run_args.rank, "AltMin rank")->check(CLI::PositiveNumber);
    run_cmd->add_option("--tau", run_args.tau, "SVT threshold (default 5(n+m)/2)");
    run_cmd->add_option("--max-iters", run_args.max_iters, "Iteration cap");
    run_cmd->add_option("--out", run_args.out, "Estimate CSV path");

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep and write results CSVs");
    add_sweep_flags(sweep_cmd, sweep_args);

    SweepArgs acquire_args;
    auto* acquire_cmd = app.add_subcommand("acquire", "Run cost-model acquisition trajectories");
    add_sweep_flags(acquire_cmd, acquire_args);

    MovielensArgs ml_args;
    auto* ml_cmd = app.add_subcommand("movielens", "Cross-validate the AltMin rank on MovieLens u.data");
    ml_cmd->add_option("--config", ml_args.config, "movielens-cv config")->check(CLI::ExistingFile);
    ml_cmd->add_option("--data", ml_args.data, "Path to u.data")->check(CLI::ExistingFile);
    ml_cmd->add_option("--folds", ml_args.folds, "Number of folds");
    ml_cmd->add_option("--ranks", ml_args.ranks, "Rank grid, e.g. 1..30 or 2,5,10");
    ml_cmd->add_option("--out", ml_args.out, "Output directory");
    ml_cmd->add_option("--seed", ml_args.seed, "Fold seed");
    ml_cmd->add_option("--max-iters", ml_args.max_iters, "AltMin iteration cap");
    ml_cmd->add_flag("--clip", ml_args.clip, "Clip predictions to [1, 5] before scoring");
    ml_cmd->add_flag("--heatmap", ml_args.heatmap, "Also export 200x200 and full heatmap CSVs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (show_isa) std::cerr << "kernels: " << kernels::isa_name(kernels::active().isa) << '\n';
        if (*synth_cmd) cmd_synth(synth_args);
        if (*run_cmd) cmd_run(run_args);
        if (*sweep_cmd) cmd_sweep(sweep_args);
        if (*acquire_cmd) cmd_acquire(acquire_args);
        if (*ml_cmd) cmd_movielens(ml_args);
    } catch (const std::exception& e) {
        std::cerr << "mclab: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
