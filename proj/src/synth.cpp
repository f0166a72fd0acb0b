#include "mclab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mclab::synth {

namespace {

using Rng = std::mt19937_64;

struct Factors {
    Matrix U;
    Matrix V;
    Rng rng;
};

Matrix gaussian(Rng& rng, int rows, int cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) out(i, j) = normal(rng);
    return out;
}

Factors draw_factors(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    Matrix U = gaussian(rng, spec.n, spec.r);
    Matrix V = gaussian(rng, spec.m, spec.r);
    return {std::move(U), std::move(V), std::move(rng)};
}

void add_noise(Matrix& y, double sigma, Rng& rng) {
    if (sigma > 0.0) y += sigma * gaussian(rng, static_cast<int>(y.rows()), static_cast<int>(y.cols()));
}

void check_probability(double p, bool allow_one, const char* what) {
    const bool ok = allow_one ? (p > 0.0 && p <= 1.0) : (p > 0.0 && p < 1.0);
    if (!ok || !std::isfinite(p))
        throw Error(std::string(what) + ": p_obs " + std::to_string(p) + (allow_one ? " outside (0, 1]" : " outside (0, 1)"));
}

}  // namespace

Kind parse_kind(std::string_view name) {
    if (name == "gaussian-lowrank") return Kind::gaussian_lowrank;
    if (name == "powerlaw") return Kind::powerlaw;
    if (name == "block-row-coherent") return Kind::block_row_coherent;
    throw Error("unknown synth kind '" + std::string(name) + "'");
}

std::string_view kind_name(Kind kind) {
    switch (kind) {
        case Kind::gaussian_lowrank: return "gaussian-lowrank";
        case Kind::powerlaw: return "powerlaw";
        case Kind::block_row_coherent: return "block-row-coherent";
    }
    return "unknown";
}

void SynthSpec::validate() const {
    if (n <= 0 || m <= 0) throw Error("synth: dimensions must be positive");
    if (r < 1 || r > std::min(n, m))
        throw Error("synth: rank " + std::to_string(r) + " outside [1, min(n,m)=" + std::to_string(std::min(n, m)) + "]");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error("synth: sigma must be >= 0");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("synth: alpha must be >= 0");
}

Matrix gen_lowrank(const SynthSpec& spec) {
    auto f = draw_factors(spec);
    Matrix y = f.U * f.V.transpose();
    add_noise(y, spec.sigma, f.rng);
    return y;
}

Matrix gen_powerlaw(const SynthSpec& spec) {
    if (spec.n != spec.m) throw Error("gen_powerlaw: requires a square matrix (n == m)");
    auto f = draw_factors(spec);
    Vector d(spec.n);
    for (int i = 0; i < spec.n; ++i) d(i) = std::pow(static_cast<double>(i + 1), -spec.alpha);
    Matrix y = d.asDiagonal() * (f.U * f.V.transpose()) * d.asDiagonal();
    add_noise(y, spec.sigma, f.rng);
    return y;
}

Matrix gen_block_coherent(const SynthSpec& spec) {
    auto f = draw_factors(spec);
    f.U.topLeftCorner(spec.r, spec.r).diagonal().array() += spec.alpha;
    Matrix y = f.U * f.V.transpose();
    add_noise(y, spec.sigma, f.rng);
    return y;
}

Matrix generate(const SynthSpec& spec) {
    switch (spec.kind) {
        case Kind::gaussian_lowrank: return gen_lowrank(spec);
        case Kind::powerlaw: return gen_powerlaw(spec);
        case Kind::block_row_coherent: return gen_block_coherent(spec);
    }
    throw Error("generate: unknown kind");
}

IndexSet mask_mcar(int n, int m, double p_obs, std::uint64_t seed) {
    check_probability(p_obs, true, "mask_mcar");
    Rng rng(seed);
    std::bernoulli_distribution keep(p_obs);
    std::vector<Entry> entries;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (keep(rng)) entries.push_back({i, j});
    return IndexSet(n, m, std::move(entries));
}

long long theoretical_budget(int n, int r, double C) {
    if (n < 1 || r < 1) throw Error("theoretical_budget: n and r must be >= 1");
    if (!(C > 0.0) || !std::isfinite(C)) throw Error("theoretical_budget: C must be > 0");
    const double log_n = std::log(static_cast<double>(n));
    const double raw = std::round(C * r * n * log_n * log_n);
    const double cap = static_cast<double>(n) * n;
    return static_cast<long long>(std::clamp(raw, 1.0, cap));
}

IndexSet mask_budget(int n, int m, long long budget, std::uint64_t seed) {
    const long long total = static_cast<long long>(n) * m;
    if (budget < 1 || budget > total)
        throw Error("mask_budget: budget " + std::to_string(budget) + " outside [1, " + std::to_string(total) + "]");
    Rng rng(seed);
    std::vector<long long> cells(static_cast<std::size_t>(total));
    std::iota(cells.begin(), cells.end(), 0LL);
    // Partial Fisher-Yates: the first `budget` slots become a uniform sample.
    for (long long k = 0; k < budget; ++k) {
        std::uniform_int_distribution<long long> pick(k, total - 1);
        std::swap(cells[k], cells[pick(rng)]);
    }
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(budget));
    for (long long k = 0; k < budget; ++k)
        entries.push_back({static_cast<int>(cells[k] / m), static_cast<int>(cells[k] % m)});
    return IndexSet(n, m, std::move(entries));
}

double topleft_inclusion_probability(int i, int j, int n, int m, double p_obs) {
    // Mean of (1 - (i+1)/(2n)) over i is 1 - (n+1)/(4n); likewise for columns.
    const double row_mean = 1.0 - (n + 1.0) / (4.0 * n);
    const double col_mean = 1.0 - (m + 1.0) / (4.0 * m);
    const double w = (1.0 - (i + 1.0) / (2.0 * n)) * (1.0 - (j + 1.0) / (2.0 * m));
    return std::min(1.0, p_obs * w / (row_mean * col_mean));
}

IndexSet mask_topleft_biased(int n, int m, double p_obs, std::uint64_t seed) {
    check_probability(p_obs, false, "mask_topleft_biased");
    if (n <= 0 || m <= 0) throw Error("mask_topleft_biased: dimensions must be positive");
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Entry> entries;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (unit(rng) < topleft_inclusion_probability(i, j, n, m, p_obs)) entries.push_back({i, j});
    return IndexSet(n, m, std::move(entries));
}

}  // namespace mclab::synth
