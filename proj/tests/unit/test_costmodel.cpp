#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mclab/costmodel.hpp"
#include "mclab/synth.hpp"

using namespace mclab;
using namespace mclab::costmodel;

namespace {

RowMatrix row_matrix(std::initializer_list<std::initializer_list<double>> rows) {
    RowMatrix m(rows.size(), rows.begin()->size());
    int i = 0;
    for (const auto& r : rows) {
        int j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

}  // namespace

TEST_CASE("cost tags and pricing names") {
    for (CostTag t : {CostTag::C1, CostTag::C2, CostTag::C3, CostTag::custom}) CHECK(parse_tag(tag_name(t)) == t);
    CHECK_THROWS_AS(parse_tag("C4"), Error);
    CHECK(parse_pricing("surge") == PricingKind::surge);
    CHECK_THROWS_AS(parse_pricing("auction"), Error);
    CHECK_THROWS_AS(CostField(row_matrix({{1.0, 0.0}}), CostTag::custom), Error);
    CHECK_THROWS_AS(CostField(row_matrix({{1.0, -2.0}}), CostTag::custom), Error);
}

TEST_CASE("cost_c1") {
    const auto c = cost_c1(100, 100, 1);
    CHECK(c.tag == CostTag::C1);
    CHECK(c.costs.minCoeff() >= 0.5);
    CHECK(c.costs.maxCoeff() <= 1.5);
    // Unif[0.5,1.5] has sd 1/sqrt(12); 4 sd of the mean of 10^4 draws is about 0.0115.
    CHECK(std::abs(c.costs.mean() - 1.0) < 0.02);
    CHECK(cost_c1(100, 100, 1).costs == c.costs);
}

TEST_CASE("cost_c2") {
    const auto c = cost_c2(100, 50, 2);
    int expensive = 0;
    for (int i = 0; i < 100; ++i) {
        if (c.costs(i, 0) == 10.0) {
            ++expensive;
            CHECK((c.costs.row(i).array() == 10.0).all());
        } else {
            CHECK((c.costs.row(i).array() == 0.5).all());
        }
    }
    CHECK(expensive == 10);
    const auto rows = c2_expensive_rows(100, 2);
    CHECK(rows.size() == 10);
    for (int i : rows) CHECK(c.costs(i, 0) == 10.0);
    CHECK(c2_expensive_rows(100, 2) == rows);
    CHECK((cost_c2(100, 5, 3, 0.004).costs.array() == 0.5).all());
    CHECK_THROWS_AS(cost_c2(10, 10, 1, 0.0), Error);
    CHECK_THROWS_AS(cost_c2(10, 10, 1, 1.0), Error);
}

TEST_CASE("cost_c3") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto c = cost_c3(100, 100, seed);
        CHECK(c.costs(99, 99) > c.costs(0, 0));
        CHECK(std::abs(c.costs(99, 99) - 4.1) <= 0.05 + 1e-12);
        CHECK(c.costs.minCoeff() > 0.0);
        for (int i = 0; i < 100; i += 13)
            for (int j = 0; j < 100; j += 7)
                CHECK(std::abs(c.costs(i, j) - (0.1 + 2.0 * ((i + 1) / 100.0 + (j + 1) / 100.0))) <= 0.05 + 1e-12);
    }
}

TEST_CASE("uncertainty_scores") {
    const auto empty = uncertainty_scores(IndexSet(3, 4));
    CHECK((empty.S.array() == 1.0).all());
    const auto full = uncertainty_scores(IndexSet::full(3, 4));
    CHECK((full.S.array() == 0.0).all());

    const auto u = uncertainty_scores(IndexSet(2, 2, {{0, 0}}));
    CHECK(u.f_row(0) == 0.5);
    CHECK(u.f_row(1) == 1.0);
    CHECK(u.f_col(0) == 0.5);
    CHECK(u.f_col(1) == 1.0);
    CHECK(u.S(0, 0) == 0.0);
    CHECK(u.S(0, 1) == 0.75);
    CHECK(u.S(1, 0) == 0.75);
    CHECK(u.S(1, 1) == 1.0);
}

TEST_CASE("acquire_step") {
    // Uniform S over the unobserved cell (0,0) and the rest, costs [[1,2],[2,2]].
    AcquisitionState s(IndexSet(2, 2), CostField(row_matrix({{1, 2}, {2, 2}}), CostTag::custom));
    CHECK(acquire_step(s) == Entry{0, 0});

    AcquisitionState tie(IndexSet(3, 3), CostField(RowMatrix::Constant(3, 3, 1.0), CostTag::custom));
    CHECK(acquire_step(tie) == Entry{0, 0});

    // Cheapest cell is observed, so it is never chosen.
    AcquisitionState obs(IndexSet(2, 2, {{1, 1}}), CostField(row_matrix({{5, 5}, {5, 0.01}}), CostTag::custom));
    CHECK(acquire_step(obs) != Entry{1, 1});

    AcquisitionState done(IndexSet::full(2, 2), CostField(RowMatrix::Ones(2, 2), CostTag::custom));
    CHECK_THROWS_AS(acquire_step(done), Error);
}

TEST_CASE("apply_pricing") {
    const CostField base(RowMatrix::Ones(3, 2), CostTag::custom);
    const auto twice = apply_pricing(apply_pricing(base, PricingRule::surge(), 0), PricingRule::surge(), 0);
    CHECK(twice.costs(0, 0) == doctest::Approx(1.21));
    CHECK(twice.costs.bottomRows(2) == base.costs.bottomRows(2));
    const auto bulk = apply_pricing(base, PricingRule::bulk(), 1);
    CHECK(bulk.costs(1, 1) < 1.0);
    CHECK_THROWS_AS(apply_pricing(base, PricingRule::none(), 0), Error);
    CHECK_THROWS_AS(apply_pricing(base, {PricingKind::surge, 0.9}, 0), Error);
    CHECK_THROWS_AS(apply_pricing(base, {PricingKind::bulk, 1.2}, 0), Error);
    CHECK_THROWS_AS(apply_pricing(base, PricingRule::surge(), 3), Error);
}

TEST_CASE("run_acquisition invariants") {
    const int n = 30, m = 25, T = 200;
    const Matrix truth = synth::gen_lowrank({n, m, 3, synth::Kind::gaussian_lowrank, 0, 0.2, 4});
    const IndexSet mask0 = synth::mask_mcar(n, m, 0.2, 5);
    for (const auto& pricing : {PricingRule::none(), PricingRule::surge(), PricingRule::bulk()}) {
        for (const auto& costs : {cost_c1(n, m, 6), cost_c2(n, m, 6), cost_c3(n, m, 6)}) {
            AcquisitionState state(mask0, costs, pricing);
            for (int t = 0; t < T; ++t) {
                const Entry e = acquire_step(state);
                CHECK_FALSE(state.mask().contains(e));
                state.reveal(e);
                const auto& sc = state.uncertainty();
                bool zero_on_omega = true;
                for (const auto& o : state.mask().entries()) zero_on_omega = zero_on_omega && sc.S(o.row, o.col) == 0.0;
                CHECK(zero_on_omega);
                CHECK(sc.S.maxCoeff() <= 1.0);
                CHECK(sc.f_row.minCoeff() >= 0.0);
                CHECK(sc.f_row.maxCoeff() <= 1.0);
                CHECK(sc.f_col.minCoeff() >= 0.0);
                CHECK(sc.f_col.maxCoeff() <= 1.0);
            }
            CHECK(state.mask().size() == mask0.size() + T);
            const auto& ledger = state.ledger();
            double prefix = 0.0;
            for (std::size_t k = 0; k < ledger.size(); ++k) {
                prefix += ledger[k].cost;
                CHECK(ledger[k].t == static_cast<int>(k) + 1);
                CHECK(ledger[k].cumulative == prefix);
            }
        }
    }

    const auto zero = run_acquisition(truth, mask0, cost_c1(n, m, 7), 0);
    CHECK(zero.ledger.empty());
    CHECK(zero.S_initial == zero.S_final);
    CHECK(zero.U_initial == zero.U_final);
    CHECK_THROWS_AS(run_acquisition(truth, mask0, cost_c1(n, m, 7), static_cast<int>(n * m - mask0.size()) + 1), Error);

    const auto traj = run_acquisition(truth, mask0, cost_c1(n, m, 7), 50);
    CHECK(traj.revealed.size() == 50);
    for (std::size_t k = 0; k < 50; ++k) CHECK(traj.revealed[k] == truth(traj.ledger[k].i, traj.ledger[k].j));
    CHECK(traj.final_mask.size() == mask0.size() + 50);
}

TEST_CASE("surge pricing makes a row progressively less attractive") {
    const int n = 10, m = 10;
    const IndexSet mask0(n, m);
    const CostField flat(RowMatrix::Ones(n, m), CostTag::custom);
    AcquisitionState state(mask0, flat, PricingRule::surge(2.0));
    state.reveal({0, 0});
    CHECK(state.costs().costs(0, 5) == 2.0);
    CHECK(state.costs().costs(1, 5) == 1.0);
    CHECK(state.ledger().back().cost == 1.0);
    CHECK(acquire_step(state).row != 0);
}

TEST_CASE("argmax sequence is invariant to rescaling the whole cost field") {
    const int n = 40, m = 40;
    const Matrix truth = synth::gen_lowrank({n, m, 3, synth::Kind::gaussian_lowrank, 0, 0, 8});
    const IndexSet mask0 = synth::mask_mcar(n, m, 0.2, 9);
    for (const auto& costs : {cost_c1(n, m, 10), cost_c2(n, m, 10), cost_c3(n, m, 10)}) {
        for (double scale : {2.0, 0.5, 3.0}) {
            const auto a = run_acquisition(truth, mask0, costs, 300);
            const auto b = run_acquisition(truth, mask0, CostField(costs.costs * scale, costs.tag), 300);
            bool same = true;
            for (int t = 0; t < 300; ++t) same = same && a.ledger[t].i == b.ledger[t].i && a.ledger[t].j == b.ledger[t].j;
            CHECK(same);
        }
    }
}

TEST_CASE("C2 expensive rows are revealed later than cheap rows") {
    const int n = 100, T = 1000;
    const Matrix truth = synth::gen_lowrank({n, n, 5, synth::Kind::gaussian_lowrank, 0, 0.2, 11});
    const IndexSet mask0 = synth::mask_mcar(n, n, 0.2, 12);
    const auto costs = cost_c2(n, n, 13);
    const auto traj = run_acquisition(truth, mask0, costs, T);
    std::vector<int> first(n, T + 1);
    for (const auto& row : traj.ledger) first[row.i] = std::min(first[row.i], row.t);
    const auto exp_rows = c2_expensive_rows(n, 13);
    double e = 0.0, c = 0.0;
    for (int i = 0; i < n; ++i) {
        if (std::find(exp_rows.begin(), exp_rows.end(), i) != exp_rows.end()) e += first[i];
        else c += first[i];
    }
    CHECK(e / exp_rows.size() > c / (n - exp_rows.size()));
}
