#pragma once

// Adaptive sampling: column-space completion over a fixed row sample, and
// two-phase leverage-score sampling.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mclab/core.hpp"

namespace mclab::adaptive {

// ||c - Π c|| / ||c|| with Π the orthogonal projector onto span(basis_obs).
// 1 for an empty basis and c != 0; 0 for c == 0.
double subspace_residual(std::span<const double> col_obs, const Matrix& basis_obs);

struct ColumnSpaceConfig {
    double p_row = 0.2;     // fraction of rows sampled, in (0, 1]
    double eps_sub = 1e-6;  // membership tolerance; 0 forces every column to be revealed
    std::optional<int> max_basis;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ColumnSpaceResult {
    Matrix completed;
    std::vector<int> sampled_rows;    // the shared row subset R, ascending
    std::vector<int> basis_columns;   // fully revealed columns, in reveal order
    int basis_rank = 0;               // columns of the orthonormal basis
    std::size_t samples_used = 0;     // distinct oracle queries
    std::vector<double> residuals;    // per column, measured before any reveal
};

// Columns are visited in ascending order. Each column is sampled on R; if it
// lies within eps_sub of the current basis it is rebuilt by least squares,
// otherwise it is fully queried and appended to the basis.
ColumnSpaceResult adaptive_column_complete(EntryOracle& oracle, const ColumnSpaceConfig& cfg);

struct LeverageScores {
    Vector row;  // ||U^T e_i||^2
    Vector col;  // ||V^T e_j||^2
};

LeverageScores leverage_scores(const SvdTriple& svd);

struct LeverageConfig {
    double phase1_fraction = 0.3;
    long long total_budget = 0;
    int rank = 1;
    std::uint64_t seed = 0;

    void validate(int n, int m) const;
    long long phase1_count() const;
};

using PassiveSolver = std::function<Matrix(const MaskedMatrix&)>;

struct TwoPhaseStats {
    std::size_t phase1_count = 0;
    std::size_t phase2_count = 0;
    std::optional<double> rmse;  // unseen RMSE against the oracle's matrix; empty if fully sampled
};

struct TwoPhaseResult {
    Matrix completed;
    IndexSet phase1;
    IndexSet phase2;
    TwoPhaseStats stats;
};

// Phase 1 queries round(phase1_fraction * B) uniform entries and estimates
// leverage from their rank-r truncated SVD. Phase 2 draws the rest of the
// budget without replacement from unobserved entries with probability
// proportional to row_i + col_j. `solver` completes the union.
TwoPhaseResult two_phase_complete(EntryOracle& oracle, const LeverageConfig& cfg, const PassiveSolver& solver);

// Without-replacement draw of `count` cells, each step picking an available cell
// with probability proportional to its weight (zero-weight cells only when
// nothing else is left). `available` is row-major n x m.
IndexSet weighted_sample(int n, int m, const std::vector<double>& weights, const std::vector<std::uint8_t>& available,
                         long long count, std::uint64_t seed);

}  // namespace mclab::adaptive
