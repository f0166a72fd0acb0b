#include "mclab/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mclab/io.hpp"
#include "mclab/movielens.hpp"

namespace mclab::bench {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kMaskStream = 1;
constexpr std::uint64_t kSolverStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kCostStream = 4;

bool numeric_kind(ExperimentKind k) {
    return k != ExperimentKind::acquisition && k != ExperimentKind::movielens_cv;
}

SolverSpec parse_solver(const json& j) {
    SolverSpec s;
    if (j.is_string()) {
        s.name = j.get<std::string>();
    } else {
        s.name = j.at("name").get<std::string>();
        s.svt.tau = j.value("tau", 0.0);
        s.svt.delta = j.value("delta", s.svt.delta);
        s.svt.epsilon = j.value("epsilon", s.svt.epsilon);
        s.svt.max_iters = j.value("max_iters", s.name == "svt" ? s.svt.max_iters : s.altmin.max_iters);
        s.altmin.max_iters = j.value("max_iters", s.altmin.max_iters);
        s.altmin.rank = j.value("rank", 0);
        s.altmin.ridge = j.value("ridge", s.altmin.ridge);
        s.altmin.tol = j.value("tol", s.altmin.tol);
        s.column.p_row = j.value("p_row", s.column.p_row);
        s.column.eps_sub = j.value("eps_sub", s.column.eps_sub);
        if (j.contains("max_basis")) s.column.max_basis = j.at("max_basis").get<int>();
        s.phase1_fraction = j.value("phase1_fraction", s.phase1_fraction);
    }
    if (s.name != "svt" && s.name != "altmin" && s.name != "adaptive-column" && s.name != "two-phase")
        throw Error("unknown solver '" + s.name + "'");
    if (s.name != "altmin" && s.name != "two-phase") s.altmin.rank = 0;
    if (s.name == "svt") s.svt.max_iters = j.is_object() ? j.value("max_iters", 500) : 500;
    return s;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

std::string opt_field(const std::optional<long long>& v) { return v ? std::to_string(*v) : std::string(); }

std::optional<long long> parse_opt(const std::string& s, const std::string& where) {
    if (s.empty()) return std::nullopt;
    return io::parse_int(s, where);
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int as_dim(double v, const char* what) {
    const double r = std::round(v);
    if (r < 1 || r != v) throw Error(std::string(what) + " grid value must be a positive integer");
    return static_cast<int>(r);
}

void write_field(const RowMatrix& m, const std::filesystem::path& path) { io::write_matrix_csv(Matrix(m), path); }

}  // namespace

ExperimentKind parse_experiment(std::string_view name) {
    static const std::map<std::string_view, ExperimentKind> kinds{
        {"size-sweep", ExperimentKind::size_sweep},
        {"c-sweep", ExperimentKind::c_sweep},
        {"consistent-hardness", ExperimentKind::consistent_hardness},
        {"coherence-sweep", ExperimentKind::coherence_sweep},
        {"rowprop-sweep", ExperimentKind::rowprop_sweep},
        {"acquisition", ExperimentKind::acquisition},
        {"movielens-cv", ExperimentKind::movielens_cv},
    };
    const auto it = kinds.find(name);
    if (it == kinds.end()) throw Error("unknown experiment kind '" + std::string(name) + "'");
    return it->second;
}

std::string_view experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::size_sweep: return "size-sweep";
        case ExperimentKind::c_sweep: return "c-sweep";
        case ExperimentKind::consistent_hardness: return "consistent-hardness";
        case ExperimentKind::coherence_sweep: return "coherence-sweep";
        case ExperimentKind::rowprop_sweep: return "rowprop-sweep";
        case ExperimentKind::acquisition: return "acquisition";
        case ExperimentKind::movielens_cv: return "movielens-cv";
    }
    return "unknown";
}

std::string_view grid_param(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::size_sweep:
        case ExperimentKind::consistent_hardness: return "n";
        case ExperimentKind::c_sweep: return "C";
        case ExperimentKind::coherence_sweep: return "alpha";
        case ExperimentKind::rowprop_sweep: return "p_row";
        case ExperimentKind::acquisition: return "model";
        case ExperimentKind::movielens_cv: return "rank";
    }
    return "";
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw Error("config: trials must be >= 1");
    switch (kind) {
        case ExperimentKind::acquisition:
            if (grid_labels.empty()) throw Error("config: acquisition grid must list cost models");
            for (const auto& g : grid_labels) costmodel::parse_tag(g);
            acquisition.pricing.validate();
            return;
        case ExperimentKind::movielens_cv:
            if (ranks.empty()) throw Error("config: movielens-cv needs a rank grid");
            if (folds < 2) throw Error("config: folds must be >= 2");
            return;
        default:
            break;
    }
    if (grid.empty()) throw Error("config: grid must be nonempty");
    if (solvers.empty()) throw Error("config: at least one solver is required");
    for (const auto& s : solvers) {
        const bool adaptive = s.name == "adaptive-column";
        if ((kind == ExperimentKind::rowprop_sweep) != adaptive)
            throw Error("config: solver '" + s.name + "' does not apply to " + std::string(experiment_name(kind)));
    }
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("config: ") + e.what());
    }
    try {
        ExperimentConfig cfg;
        cfg.kind = parse_experiment(j.at("experiment").get<std::string>());
        if (j.contains("grid")) {
            for (const auto& g : j.at("grid")) {
                if (g.is_string()) cfg.grid_labels.push_back(g.get<std::string>());
                else cfg.grid.push_back(g.get<double>());
            }
        }
        cfg.trials = j.value("trials", cfg.trials);
        cfg.base_seed = j.value("base_seed", cfg.base_seed);
        if (j.contains("instance")) {
            const auto& in = j.at("instance");
            InstanceSpec& s = cfg.instance;
            s.n = in.value("n", s.n);
            s.m = in.value("m", s.n);
            s.r = in.value("r", s.r);
            if (in.contains("kind")) s.kind = synth::parse_kind(in.at("kind").get<std::string>());
            s.alpha = in.value("alpha", s.alpha);
            s.sigma = in.value("sigma", s.sigma);
            s.p_obs = in.value("p_obs", s.p_obs);
            s.C = in.value("C", s.C);
        }
        if (j.contains("solvers"))
            for (const auto& s : j.at("solvers")) cfg.solvers.push_back(parse_solver(s));
        if (j.contains("acquisition")) {
            const auto& a = j.at("acquisition");
            cfg.acquisition.steps = a.value("T", cfg.acquisition.steps);
            cfg.acquisition.complete = a.value("complete", cfg.acquisition.complete);
            const auto kind = costmodel::parse_pricing(a.value("pricing", std::string("none")));
            const double def = kind == costmodel::PricingKind::bulk ? 0.9 : kind == costmodel::PricingKind::surge ? 1.1 : 1.0;
            cfg.acquisition.pricing = {kind, a.value("factor", def)};
        }
        if (j.contains("movielens")) {
            const auto& mlj = j.at("movielens");
            cfg.data = mlj.value("data", std::string());
            cfg.folds = mlj.value("folds", cfg.folds);
            if (mlj.contains("ranks")) {
                const auto& rk = mlj.at("ranks");
                cfg.ranks = rk.is_string() ? movielens::parse_rank_grid(rk.get<std::string>()) : rk.get<std::vector<int>>();
            }
        }
        if (cfg.kind == ExperimentKind::movielens_cv && cfg.ranks.empty())
            for (double g : cfg.grid) cfg.ranks.push_back(static_cast<int>(g));
        cfg.output = j.value("output", cfg.output.string());
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

TrialInstance make_instance(const ExperimentConfig& cfg, double grid_value, int trial) {
    const InstanceSpec& in = cfg.instance;
    TrialInstance out;
    out.seed = cfg.base_seed + static_cast<std::uint64_t>(trial);
    synth::SynthSpec spec{in.n, in.m, in.r, in.kind, in.alpha, in.sigma, out.seed};
    const std::uint64_t mask_seed = derive_seed(out.seed, kMaskStream);
    switch (cfg.kind) {
        case ExperimentKind::size_sweep:
            spec.n = spec.m = as_dim(grid_value, "n");
            out.truth = synth::generate(spec);
            out.mask = synth::mask_mcar(spec.n, spec.m, in.p_obs, mask_seed);
            break;
        case ExperimentKind::c_sweep:
            out.truth = synth::generate(spec);
            out.mask = synth::mask_budget(spec.n, spec.m, synth::theoretical_budget(spec.n, spec.r, grid_value), mask_seed);
            break;
        case ExperimentKind::consistent_hardness:
            spec.n = spec.m = as_dim(grid_value, "n");
            out.truth = synth::generate(spec);
            out.mask = synth::mask_budget(spec.n, spec.m, synth::theoretical_budget(spec.n, spec.r, in.C), mask_seed);
            break;
        case ExperimentKind::coherence_sweep:
            spec.alpha = grid_value;
            out.truth = synth::generate(spec);
            out.mask = synth::mask_mcar(spec.n, spec.m, in.p_obs, mask_seed);
            break;
        case ExperimentKind::rowprop_sweep:
            out.truth = synth::generate(spec);
            break;
        default:
            throw Error("make_instance: experiment kind has no synthetic instance");
    }
    return out;
}

TrialResult run_solver(const ExperimentConfig& cfg, const SolverSpec& solver, const TrialInstance& inst) {
    TrialResult res;
    res.solver = solver.name;
    try {
        const int n = static_cast<int>(inst.truth.rows());
        const int m = static_cast<int>(inst.truth.cols());
        if (solver.name == "svt") {
            passive::SvtConfig svt = solver.svt;
            if (svt.tau <= 0.0) svt.tau = passive::SvtConfig::defaults_for(n, m).tau;
            const MaskedMatrix obs = MaskedMatrix::from_dense(inst.truth, inst.mask);
            const auto start = Clock::now();
            const auto done = passive::svt_complete(obs, svt);
            res.seconds = seconds_since(start);
            res.iterations = done.trace.iters_used;
            res.samples_used = static_cast<long long>(obs.mask().size());
            res.rmse = rmse_unseen(inst.truth, done.estimate, inst.mask);
        } else if (solver.name == "altmin") {
            passive::AltMinConfig am = solver.altmin;
            if (am.rank <= 0) am.rank = cfg.instance.r;
            const MaskedMatrix obs = MaskedMatrix::from_dense(inst.truth, inst.mask);
            const auto start = Clock::now();
            const auto done = passive::altmin_complete(obs, am);
            res.seconds = seconds_since(start);
            res.iterations = done.trace.iters_used;
            res.samples_used = static_cast<long long>(obs.mask().size());
            res.rmse = rmse_unseen(inst.truth, done.estimate, inst.mask);
        } else if (solver.name == "adaptive-column") {
            adaptive::ColumnSpaceConfig col = solver.column;
            col.seed = derive_seed(inst.seed, kSolverStream);
            EntryOracle oracle(inst.truth);
            const auto start = Clock::now();
            const auto done = adaptive::adaptive_column_complete(oracle, col);
            res.seconds = seconds_since(start);
            res.samples_used = static_cast<long long>(done.samples_used);
            res.basis_size = done.basis_rank;
            res.rmse = rmse_unseen(inst.truth, done.completed, oracle.observations().mask());
        } else if (solver.name == "two-phase") {
            passive::AltMinConfig am = solver.altmin;
            if (am.rank <= 0) am.rank = cfg.instance.r;
            adaptive::LeverageConfig lev{solver.phase1_fraction, static_cast<long long>(inst.mask.size()), am.rank,
                                         derive_seed(inst.seed, kSolverStream)};
            EntryOracle oracle(inst.truth);
            const auto start = Clock::now();
            const auto done = adaptive::two_phase_complete(
                oracle, lev, [&](const MaskedMatrix& obs) { return passive::altmin_complete(obs, am).estimate; });
            res.seconds = seconds_since(start);
            res.samples_used = static_cast<long long>(oracle.distinct_queries());
            if (!done.stats.rmse) throw Error("rmse_unseen: every entry is observed, metric undefined");
            res.rmse = *done.stats.rmse;
        }
    } catch (const std::exception& e) {
        res.rmse = std::numeric_limits<double>::quiet_NaN();
        res.status = "error: " + sanitize(e.what());
    }
    return res;
}

SweepTable run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!numeric_kind(cfg.kind))
        throw Error("run_sweep: '" + std::string(experiment_name(cfg.kind)) + "' is driven by its own subcommand");
    SweepTable table;
    table.experiment = experiment_name(cfg.kind);
    table.grid_param = grid_param(cfg.kind);
    for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
        const double value = cfg.grid[g];
        for (int t = 0; t < cfg.trials; ++t) {
            std::optional<TrialInstance> inst;
            std::string failure;
            try {
                inst = make_instance(cfg, value, t);
            } catch (const std::exception& e) {
                failure = "error: " + sanitize(e.what());
            }
            for (const SolverSpec& s : cfg.solvers) {
                SolverSpec solver = s;
                if (cfg.kind == ExperimentKind::rowprop_sweep) solver.column.p_row = value;
                TrialResult row;
                if (inst) {
                    row = run_solver(cfg, solver, *inst);
                } else {
                    row.solver = s.name;
                    row.rmse = std::numeric_limits<double>::quiet_NaN();
                    row.status = failure;
                }
                row.grid_index = static_cast<int>(g);
                row.grid_value = value;
                row.trial = t;
                table.rows.push_back(std::move(row));
            }
        }
    }
    return table;
}

std::vector<AggregateRow> SweepTable::aggregate() const {
    struct Acc {
        double grid_value;
        std::string solver;
        std::vector<double> rmse;
        std::vector<double> seconds;
    };
    std::vector<Acc> groups;
    std::map<std::pair<int, std::string>, std::size_t> index;
    for (const auto& r : rows) {
        const auto key = std::make_pair(r.grid_index, r.solver);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, groups.size()).first;
            groups.push_back({r.grid_value, r.solver, {}, {}});
        }
        if (r.ok()) {
            groups[it->second].rmse.push_back(r.rmse);
            groups[it->second].seconds.push_back(r.seconds);
        }
    }
    const auto stats = [](const std::vector<double>& xs) -> std::pair<double, double> {
        if (xs.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        if (xs.size() < 2) return {mean, 0.0};
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
    };
    std::vector<AggregateRow> out;
    for (const auto& g : groups) {
        const auto [rm, rs] = stats(g.rmse);
        const auto [sm, ss] = stats(g.seconds);
        out.push_back({g.grid_value, g.solver, rm, rs, sm, ss});
    }
    return out;
}

std::filesystem::path aggregate_path(const std::filesystem::path& results_path) {
    return results_path.parent_path() / (results_path.stem().string() + "_aggregate.csv");
}

void write_results(const SweepTable& table, const std::filesystem::path& path) {
    if (table.rows.empty()) throw Error("write_results: empty table");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    {
        std::ofstream out(path);
        if (!out) throw Error("cannot open " + path.string() + " for writing");
        out << kResultsHeader << '\n';
        for (const auto& r : table.rows) {
            out << table.experiment << ',' << table.grid_param << ',' << io::format_double(r.grid_value) << ','
                << r.solver << ',' << r.trial << ',' << io::format_double(r.rmse) << ','
                << io::format_double(r.seconds) << ',' << opt_field(r.iterations) << ',' << opt_field(r.samples_used)
                << ',' << opt_field(r.basis_size) << ',' << sanitize(r.status) << '\n';
        }
        if (!out) throw Error("write failed: " + path.string());
    }
    const auto agg_path = aggregate_path(path);
    std::ofstream agg(agg_path);
    if (!agg) throw Error("cannot open " + agg_path.string() + " for writing");
    agg << kAggregateHeader << '\n';
    for (const auto& a : table.aggregate()) {
        agg << io::format_double(a.grid_value) << ',' << a.solver << ',' << io::format_double(a.rmse_mean) << ','
            << io::format_double(a.rmse_std) << ',' << io::format_double(a.seconds_mean) << ','
            << io::format_double(a.seconds_std) << '\n';
    }
    if (!agg) throw Error("write failed: " + agg_path.string());
}

SweepTable read_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader) throw Error(path.string() + ": unexpected header");
    SweepTable table;
    std::map<double, int> grid_index;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        const auto f = io::split_csv_line(line);
        if (f.size() != 11) throw Error(where + ": expected 11 fields");
        table.experiment = f[0];
        table.grid_param = f[1];
        TrialResult r;
        r.grid_value = io::parse_double(f[2], where);
        r.grid_index = grid_index.emplace(r.grid_value, static_cast<int>(grid_index.size())).first->second;
        r.solver = f[3];
        r.trial = static_cast<int>(io::parse_int(f[4], where));
        r.rmse = io::parse_double(f[5], where);
        r.seconds = io::parse_double(f[6], where);
        r.iterations = parse_opt(f[7], where);
        r.samples_used = parse_opt(f[8], where);
        r.basis_size = parse_opt(f[9], where);
        r.status = f[10];
        table.rows.push_back(std::move(r));
    }
    return table;
}

AcquisitionRun run_acquisition_experiment(const InstanceSpec& inst, costmodel::CostTag model,
                                          const AcquisitionSpec& spec, std::uint64_t seed) {
    AcquisitionRun run;
    synth::SynthSpec s{inst.n, inst.m, inst.r, synth::Kind::gaussian_lowrank, 0.0, 0.0, seed};
    run.truth = synth::gen_lowrank(s);
    run.observed = run.truth;
    if (inst.sigma > 0.0) {
        std::mt19937_64 rng(derive_seed(seed, kNoiseStream));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int i = 0; i < inst.n; ++i)
            for (int j = 0; j < inst.m; ++j) run.observed(i, j) += inst.sigma * normal(rng);
    }
    const std::uint64_t mask_seed = derive_seed(seed, kMaskStream);
    run.mask0 = model == costmodel::CostTag::C3 ? synth::mask_topleft_biased(inst.n, inst.m, inst.p_obs, mask_seed)
                                                : synth::mask_mcar(inst.n, inst.m, inst.p_obs, mask_seed);
    const std::uint64_t cost_seed = derive_seed(seed, kCostStream);
    switch (model) {
        case costmodel::CostTag::C1: run.costs = costmodel::cost_c1(inst.n, inst.m, cost_seed); break;
        case costmodel::CostTag::C2: run.costs = costmodel::cost_c2(inst.n, inst.m, cost_seed); break;
        case costmodel::CostTag::C3: run.costs = costmodel::cost_c3(inst.n, inst.m, cost_seed); break;
        case costmodel::CostTag::custom: throw Error("acquisition experiment needs C1, C2 or C3");
    }
    run.trajectory = costmodel::run_acquisition(run.observed, run.mask0, run.costs, spec.steps, spec.pricing);
    if (spec.complete && run.trajectory.final_mask.size() < static_cast<std::size_t>(inst.n) * inst.m) {
        passive::AltMinConfig am;
        am.rank = inst.r;
        const MaskedMatrix obs = MaskedMatrix::from_dense(run.observed, run.trajectory.final_mask);
        run.completion_rmse = rmse_unseen(run.truth, passive::altmin_complete(obs, am).estimate, obs.mask());
    }
    return run;
}

void write_trajectory(const AcquisitionRun& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto ledger_path = dir / "ledger.csv";
    std::ofstream out(ledger_path);
    if (!out) throw Error("cannot open " + ledger_path.string() + " for writing");
    out << "t,i,j,cost,cumcost\n";
    for (const auto& row : run.trajectory.ledger)
        out << row.t << ',' << row.i << ',' << row.j << ',' << io::format_double(row.cost) << ','
            << io::format_double(row.cumulative) << '\n';
    if (!out) throw Error("write failed: " + ledger_path.string());
    write_field(run.trajectory.costs_initial, dir / "field_costs.csv");
    write_field(run.trajectory.S_initial, dir / "field_S_initial.csv");
    write_field(run.trajectory.U_initial, dir / "field_U_initial.csv");
    write_field(run.trajectory.S_final, dir / "field_S_final.csv");
    write_field(run.trajectory.U_final, dir / "field_U_final.csv");
}

std::vector<AcquisitionSummary> run_acquisition_suite(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    cfg.validate();
    if (cfg.kind != ExperimentKind::acquisition) throw Error("run_acquisition_suite: config is not an acquisition experiment");
    std::filesystem::create_directories(out);
    std::vector<AcquisitionSummary> rows;
    for (const auto& label : cfg.grid_labels) {
        const auto model = costmodel::parse_tag(label);
        for (int t = 0; t < cfg.trials; ++t) {
            const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(t);
            const auto run = run_acquisition_experiment(cfg.instance, model, cfg.acquisition, seed);
            write_trajectory(run, out / std::string(costmodel::tag_name(model)) / ("trial_" + std::to_string(t)));
            AcquisitionSummary row{std::string(costmodel::tag_name(model)), t, seed, cfg.acquisition.steps, 0.0,
                                   run.completion_rmse};
            if (!run.trajectory.ledger.empty()) row.total_cost = run.trajectory.ledger.back().cumulative;
            rows.push_back(std::move(row));
        }
    }
    const auto path = out / "acquisition_summary.csv";
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << kAcquisitionHeader << '\n';
    for (const auto& r : rows) {
        const double mean = r.steps > 0 ? r.total_cost / r.steps : 0.0;
        f << r.model << ',' << r.trial << ',' << r.seed << ',' << r.steps << ',' << io::format_double(r.total_cost) << ','
          << io::format_double(mean) << ',' << (r.completion_rmse ? io::format_double(*r.completion_rmse) : "") << '\n';
    }
    if (!f) throw Error("write failed: " + path.string());
    return rows;
}

}  // namespace mclab::bench
