#pragma once

// Greedy uncertainty-per-cost acquisition.
//
// Uncertainty is purely mask based: f_row(i) = 1 - (observed in row i)/m,
// f_col(j) = 1 - (observed in column j)/n, S_ij = (f_row(i) + f_col(j)) / 2 on
// unobserved entries and 0 on observed ones. Each step reveals the unobserved
// argmax of S_ij / C_ij, ties going to the smallest (i, j).

#include <cstdint>
#include <string_view>
#include <vector>

#include "mclab/core.hpp"

namespace mclab::costmodel {

enum class CostTag { C1, C2, C3, custom };

std::string_view tag_name(CostTag tag);
CostTag parse_tag(std::string_view name);

struct CostField {
    RowMatrix costs;  // strictly positive
    CostTag tag = CostTag::custom;

    CostField() = default;
    CostField(RowMatrix costs, CostTag tag);
};

// i.i.d. Unif[0.5, 1.5]
CostField cost_c1(int n, int m, std::uint64_t seed);

// round(frac_expensive * n) rows chosen uniformly cost `expensive`; all else `base`.
CostField cost_c2(int n, int m, std::uint64_t seed, double frac_expensive = 0.1, double base = 0.5,
                  double expensive = 10.0);
// Rows that cost_c2 marks expensive for the same arguments.
std::vector<int> c2_expensive_rows(int n, std::uint64_t seed, double frac_expensive = 0.1);

// 0.1 + 2((i+1)/n + (j+1)/m) + Unif[-0.05, 0.05], kept > 0.
CostField cost_c3(int n, int m, std::uint64_t seed);

struct Uncertainty {
    Vector f_row;
    Vector f_col;
    RowMatrix S;
};

Uncertainty uncertainty_scores(const IndexSet& mask);

enum class PricingKind { none, surge, bulk };

struct PricingRule {
    PricingKind kind = PricingKind::none;
    double factor = 1.0;

    static PricingRule none() { return {}; }
    static PricingRule surge(double factor = 1.1) { return {PricingKind::surge, factor}; }
    static PricingRule bulk(double factor = 0.9) { return {PricingKind::bulk, factor}; }

    // surge needs factor > 1, bulk needs factor in (0, 1).
    void validate() const;
};

PricingKind parse_pricing(std::string_view name);

// Scales every cost in row i by rule.factor.
CostField apply_pricing(CostField costs, const PricingRule& rule, int row);

struct LedgerRow {
    int t = 0;  // 1-based step
    int i = 0;
    int j = 0;
    double cost = 0.0;
    double cumulative = 0.0;
};

class AcquisitionState {
public:
    AcquisitionState(IndexSet mask, CostField costs, PricingRule pricing = {});

    const IndexSet& mask() const { return mask_; }
    const Uncertainty& uncertainty() const { return scores_; }
    const RowMatrix& utility() const { return utility_; }
    const CostField& costs() const { return costs_; }
    const std::vector<LedgerRow>& ledger() const { return ledger_; }
    std::size_t unobserved() const;

    // Marks (i,j) observed, charges its current cost, applies the pricing
    // rule to row i, then refreshes scores and utilities.
    void reveal(Entry e);

private:
    void refresh();

    IndexSet mask_;
    CostField costs_;
    PricingRule pricing_;
    Uncertainty scores_;
    RowMatrix utility_;
    std::vector<LedgerRow> ledger_;
};

// Unobserved argmax of S / C with lexicographic tie-break.
Entry acquire_step(const AcquisitionState& state);

struct Trajectory {
    std::vector<LedgerRow> ledger;
    std::vector<double> revealed;  // noisy values obtained at each step
    RowMatrix costs_initial;
    RowMatrix costs_final;
    RowMatrix S_initial;
    RowMatrix U_initial;
    RowMatrix S_final;  // after the last update
    RowMatrix U_final;
    IndexSet final_mask;
};

Trajectory run_acquisition(const Matrix& truth, const IndexSet& mask0, const CostField& costs, int steps,
                           const PricingRule& pricing = {});

}  // namespace mclab::costmodel
