#include "mclab/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mclab/kernels.hpp"

namespace mclab::costmodel {

namespace {

void check_dims(int n, int m) {
    if (n <= 0 || m <= 0) throw Error("cost field dimensions must be positive");
}

}  // namespace

std::string_view tag_name(CostTag tag) {
    switch (tag) {
        case CostTag::C1: return "C1";
        case CostTag::C2: return "C2";
        case CostTag::C3: return "C3";
        case CostTag::custom: return "custom";
    }
    return "custom";
}

CostTag parse_tag(std::string_view name) {
    if (name == "C1" || name == "c1") return CostTag::C1;
    if (name == "C2" || name == "c2") return CostTag::C2;
    if (name == "C3" || name == "c3") return CostTag::C3;
    if (name == "custom") return CostTag::custom;
    throw Error("unknown cost model '" + std::string(name) + "'");
}

CostField::CostField(RowMatrix c, CostTag t) : costs(std::move(c)), tag(t) {
    if (costs.size() == 0) throw Error("cost field is empty");
    if (!costs.allFinite() || (costs.array() <= 0.0).any()) throw Error("cost field entries must be finite and > 0");
}

CostField cost_c1(int n, int m, std::uint64_t seed) {
    check_dims(n, m);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    RowMatrix c(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) c(i, j) = unif(rng);
    return {std::move(c), CostTag::C1};
}

std::vector<int> c2_expensive_rows(int n, std::uint64_t seed, double frac_expensive) {
    if (!(frac_expensive > 0.0 && frac_expensive < 1.0)) throw Error("cost_c2: frac_expensive must lie in (0, 1)");
    const auto count = static_cast<int>(std::lround(frac_expensive * n));
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

CostField cost_c2(int n, int m, std::uint64_t seed, double frac_expensive, double base, double expensive) {
    check_dims(n, m);
    RowMatrix c = RowMatrix::Constant(n, m, base);
    for (int i : c2_expensive_rows(n, seed, frac_expensive)) c.row(i).setConstant(expensive);
    return {std::move(c), CostTag::C2};
}

CostField cost_c3(int n, int m, std::uint64_t seed) {
    check_dims(n, m);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    RowMatrix c(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const double v = 0.1 + 2.0 * ((i + 1.0) / n + (j + 1.0) / m) + jitter(rng);
            c(i, j) = std::max(v, 1e-6);
        }
    }
    return {std::move(c), CostTag::C3};
}

Uncertainty uncertainty_scores(const IndexSet& mask) {
    const int n = mask.rows();
    const int m = mask.cols();
    Uncertainty u;
    u.f_row.resize(n);
    u.f_col.resize(m);
    const auto rows = mask.row_counts();
    const auto cols = mask.col_counts();
    for (int i = 0; i < n; ++i) u.f_row(i) = 1.0 - static_cast<double>(rows[i]) / m;
    for (int j = 0; j < m; ++j) u.f_col(j) = 1.0 - static_cast<double>(cols[j]) / n;
    u.S.resize(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) u.S(i, j) = mask.contains(i, j) ? 0.0 : 0.5 * (u.f_row(i) + u.f_col(j));
    return u;
}

void PricingRule::validate() const {
    switch (kind) {
        case PricingKind::none:
            return;
        case PricingKind::surge:
            if (!(factor > 1.0) || !std::isfinite(factor)) throw Error("surge pricing needs factor > 1");
            return;
        case PricingKind::bulk:
            if (!(factor > 0.0 && factor < 1.0)) throw Error("bulk pricing needs factor in (0, 1)");
            return;
    }
}

PricingKind parse_pricing(std::string_view name) {
    if (name == "none") return PricingKind::none;
    if (name == "surge") return PricingKind::surge;
    if (name == "bulk") return PricingKind::bulk;
    throw Error("unknown pricing rule '" + std::string(name) + "'");
}

CostField apply_pricing(CostField costs, const PricingRule& rule, int row) {
    rule.validate();
    if (rule.kind == PricingKind::none) throw Error("apply_pricing: rule kind is none");
    if (row < 0 || row >= costs.costs.rows()) throw Error("apply_pricing: row out of range");
    costs.costs.row(row) *= rule.factor;
    return costs;
}

// AcquisitionState -------------------------------------------------------

AcquisitionState::AcquisitionState(IndexSet mask, CostField costs, PricingRule pricing)
    : mask_(std::move(mask)), costs_(std::move(costs)), pricing_(pricing) {
    pricing_.validate();
    if (costs_.costs.rows() != mask_.rows() || costs_.costs.cols() != mask_.cols())
        throw Error("acquisition: cost field and mask dimensions differ");
    refresh();
}

std::size_t AcquisitionState::unobserved() const {
    return static_cast<std::size_t>(mask_.rows()) * mask_.cols() - mask_.size();
}

void AcquisitionState::refresh() {
    scores_ = uncertainty_scores(mask_);
    utility_ = scores_.S.array() / costs_.costs.array();
}

void AcquisitionState::reveal(Entry e) {
    if (!mask_.insert(e.row, e.col))
        throw Error("acquisition: entry (" + std::to_string(e.row) + "," + std::to_string(e.col) + ") already observed");
    const double paid = costs_.costs(e.row, e.col);
    const double before = ledger_.empty() ? 0.0 : ledger_.back().cumulative;
    ledger_.push_back({static_cast<int>(ledger_.size()) + 1, e.row, e.col, paid, before + paid});
    if (pricing_.kind != PricingKind::none) costs_ = apply_pricing(std::move(costs_), pricing_, e.row);
    refresh();
}

Entry acquire_step(const AcquisitionState& state) {
    if (state.unobserved() == 0) throw Error("acquisition complete: no unobserved entries");
    const RowMatrix& s = state.uncertainty().S;
    const RowMatrix& c = state.costs().costs;
    const auto size = static_cast<std::size_t>(s.size());
    const std::size_t k = kernels::ratio_argmax({s.data(), size}, {c.data(), size});
    const Entry e{static_cast<int>(k / s.cols()), static_cast<int>(k % s.cols())};
    if (state.mask().contains(e)) throw Error("acquisition: argmax landed on an observed entry");
    return e;
}

Trajectory run_acquisition(const Matrix& truth, const IndexSet& mask0, const CostField& costs, int steps,
                           const PricingRule& pricing) {
    if (truth.rows() != mask0.rows() || truth.cols() != mask0.cols())
        throw Error("run_acquisition: truth and mask dimensions differ");
    AcquisitionState state(mask0, costs, pricing);
    if (steps < 0 || static_cast<std::size_t>(steps) > state.unobserved())
        throw Error("run_acquisition: T=" + std::to_string(steps) + " exceeds the " +
                    std::to_string(state.unobserved()) + " unobserved entries");
    Trajectory out;
    out.costs_initial = state.costs().costs;
    out.S_initial = state.uncertainty().S;
    out.U_initial = state.utility();
    out.revealed.reserve(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
        const Entry e = acquire_step(state);
        out.revealed.push_back(truth(e.row, e.col));
        state.reveal(e);
    }
    out.ledger = state.ledger();
    out.costs_final = state.costs().costs;
    out.S_final = state.uncertainty().S;
    out.U_final = state.utility();
    out.final_mask = state.mask();
    return out;
}

}  // namespace mclab::costmodel
