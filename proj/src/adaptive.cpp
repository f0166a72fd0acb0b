#include "mclab/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mclab/synth.hpp"

namespace mclab::adaptive {

namespace {

constexpr double kReconstructRidge = 1e-10;
constexpr std::uint64_t kPhase2Stream = 0x9E3779B97F4A7C15ULL;

std::vector<int> sample_rows(int n, double p_row, std::uint64_t seed) {
    const int count = std::max(1, static_cast<int>(std::lround(p_row * n)));
    std::mt19937_64 rng(seed);
    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    for (int k = 0; k < count; ++k) {
        std::uniform_int_distribution<int> pick(k, n - 1);
        std::swap(rows[k], rows[pick(rng)]);
    }
    rows.resize(count);
    std::sort(rows.begin(), rows.end());
    return rows;
}

Matrix restrict_rows(const Matrix& basis, const std::vector<int>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), basis.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = basis.row(rows[k]);
    return out;
}

// Appends the component of `column` orthogonal to `basis` (two Gram-Schmidt
// passes). Returns false when the column already lies in the span.
bool append_orthonormal(Matrix& basis, const Vector& column) {
    Vector v = column;
    const double norm = v.norm();
    if (norm == 0.0) return false;
    for (int pass = 0; pass < 2 && basis.cols() > 0; ++pass) v -= basis * (basis.transpose() * v);
    const double rest = v.norm();
    if (rest <= 1e-12 * norm) return false;
    basis.conservativeResize(basis.rows(), basis.cols() + 1);
    basis.col(basis.cols() - 1) = v / rest;
    return true;
}

}  // namespace

double subspace_residual(std::span<const double> col_obs, const Matrix& basis_obs) {
    if (col_obs.empty()) throw Error("subspace_residual: no observed rows");
    const Eigen::Map<const Vector> c(col_obs.data(), static_cast<Eigen::Index>(col_obs.size()));
    const double norm = c.norm();
    if (norm == 0.0) return 0.0;
    if (basis_obs.cols() == 0) return 1.0;
    if (basis_obs.rows() != c.size()) throw Error("subspace_residual: basis and column lengths differ");
    Eigen::ColPivHouseholderQR<Matrix> qr(basis_obs);
    const Eigen::Index rank = qr.rank();
    if (rank == 0) return 1.0;
    const Matrix q = qr.householderQ() * Matrix::Identity(c.size(), rank);
    const Vector rest = c - q * (q.transpose() * c);
    return rest.norm() / norm;
}

void ColumnSpaceConfig::validate() const {
    if (!(p_row > 0.0 && p_row <= 1.0)) throw Error("column-space: p_row must lie in (0, 1]");
    if (!(eps_sub >= 0.0)) throw Error("column-space: eps_sub must be >= 0");
    if (max_basis && *max_basis < 1) throw Error("column-space: max_basis must be >= 1");
}

ColumnSpaceResult adaptive_column_complete(EntryOracle& oracle, const ColumnSpaceConfig& cfg) {
    cfg.validate();
    const int n = oracle.rows();
    const int m = oracle.cols();

    ColumnSpaceResult out;
    out.sampled_rows = sample_rows(n, cfg.p_row, cfg.seed);
    out.completed = Matrix::Zero(n, m);
    out.residuals.reserve(m);

    const auto& rows = out.sampled_rows;
    Matrix basis(n, 0);
    Matrix basis_obs(static_cast<Eigen::Index>(rows.size()), 0);
    Vector c(static_cast<Eigen::Index>(rows.size()));

    for (int j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < rows.size(); ++k) c(static_cast<Eigen::Index>(k)) = oracle.query(rows[k], j);
        const double residual = subspace_residual({c.data(), static_cast<std::size_t>(c.size())}, basis_obs);
        out.residuals.push_back(residual);

        if (cfg.eps_sub > 0.0 && residual <= cfg.eps_sub) {
            if (basis.cols() == 0) continue;  // zero on R with an empty basis: column stays zero
            Matrix gram = basis_obs.transpose() * basis_obs;
            gram.diagonal().array() += kReconstructRidge;
            const Vector coeff = gram.ldlt().solve(basis_obs.transpose() * c);
            out.completed.col(j) = basis * coeff;
            continue;
        }

        Vector column(n);
        for (int i = 0; i < n; ++i) column(i) = oracle.query(i, j);
        out.completed.col(j) = column;
        out.basis_columns.push_back(j);
        if (append_orthonormal(basis, column)) {
            if (cfg.max_basis && basis.cols() > *cfg.max_basis)
                throw Error("column-space: basis rank exceeds max_basis=" + std::to_string(*cfg.max_basis) +
                            " at column " + std::to_string(j));
            basis_obs = restrict_rows(basis, rows);
        }
    }
    out.basis_rank = static_cast<int>(basis.cols());
    out.samples_used = oracle.distinct_queries();
    return out;
}

LeverageScores leverage_scores(const SvdTriple& svd) {
    return {svd.U.rowwise().squaredNorm(), svd.V.rowwise().squaredNorm()};
}

void LeverageConfig::validate(int n, int m) const {
    if (!(phase1_fraction > 0.0 && phase1_fraction < 1.0)) throw Error("leverage: phase1_fraction must lie in (0, 1)");
    const long long total = static_cast<long long>(n) * m;
    if (total_budget < 1 || total_budget > total)
        throw Error("leverage: budget " + std::to_string(total_budget) + " outside [1, " + std::to_string(total) + "]");
    if (phase1_count() < 1) throw Error("leverage: phase-1 sample count rounds to zero");
    if (rank < 1 || rank > std::min(n, m)) throw Error("leverage: rank outside [1, min(n,m)]");
}

long long LeverageConfig::phase1_count() const {
    return std::llround(phase1_fraction * static_cast<double>(total_budget));
}

IndexSet weighted_sample(int n, int m, const std::vector<double>& weights, const std::vector<std::uint8_t>& available,
                         long long count, std::uint64_t seed) {
    const std::size_t cells = static_cast<std::size_t>(n) * m;
    if (weights.size() != cells || available.size() != cells) throw Error("weighted_sample: size mismatch");
    // Exponential-key method: taking the `count` largest log(u)/w keys is
    // distributed as successive draws proportional to w without replacement.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    struct Keyed {
        double key;
        std::size_t cell;
    };
    std::vector<Keyed> pool;
    for (std::size_t c = 0; c < cells; ++c) {
        if (!available[c]) continue;
        const double u = unit(rng);
        const double w = weights[c];
        if (w < 0.0 || !std::isfinite(w)) throw Error("weighted_sample: weights must be finite and >= 0");
        const double key = w > 0.0 ? std::log(std::max(u, std::numeric_limits<double>::min())) / w
                                   : -std::numeric_limits<double>::infinity();
        pool.push_back({key, c});
    }
    if (count < 0 || static_cast<std::size_t>(count) > pool.size())
        throw Error("weighted_sample: not enough available cells");
    std::partial_sort(pool.begin(), pool.begin() + count, pool.end(), [](const Keyed& a, const Keyed& b) {
        return a.key > b.key || (a.key == b.key && a.cell < b.cell);
    });
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(count));
    for (long long k = 0; k < count; ++k)
        entries.push_back({static_cast<int>(pool[k].cell / m), static_cast<int>(pool[k].cell % m)});
    return IndexSet(n, m, std::move(entries));
}

TwoPhaseResult two_phase_complete(EntryOracle& oracle, const LeverageConfig& cfg, const PassiveSolver& solver) {
    const int n = oracle.rows();
    const int m = oracle.cols();
    cfg.validate(n, m);
    if (!solver) throw Error("two_phase_complete: no solver supplied");

    TwoPhaseResult out;
    const long long first = cfg.phase1_count();
    out.phase1 = synth::mask_budget(n, m, first, cfg.seed);
    for (const Entry& e : out.phase1.entries()) oracle.query(e.row, e.col);

    const MaskedMatrix rough = oracle.observations();
    const int r = std::min(cfg.rank, std::min(n, m));
    const LeverageScores scores = leverage_scores(truncated_svd(rough.zero_filled(), r));

    std::vector<double> weights(static_cast<std::size_t>(n) * m);
    std::vector<std::uint8_t> available(weights.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const std::size_t c = static_cast<std::size_t>(i) * m + j;
            weights[c] = scores.row(i) + scores.col(j);
            available[c] = out.phase1.contains(i, j) ? 0 : 1;
        }
    }
    out.phase2 = weighted_sample(n, m, weights, available, cfg.total_budget - first, cfg.seed ^ kPhase2Stream);
    for (const Entry& e : out.phase2.entries()) oracle.query(e.row, e.col);

    const MaskedMatrix all = oracle.observations();
    out.completed = solver(all);
    out.stats.phase1_count = out.phase1.size();
    out.stats.phase2_count = out.phase2.size();
    if (all.mask().size() < static_cast<std::size_t>(n) * m)
        out.stats.rmse = rmse_unseen(oracle.hidden(), out.completed, all.mask());
    return out;
}

}  // namespace mclab::adaptive
