#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "helpers.hpp"
#include "mclab/passive.hpp"
#include "mclab/synth.hpp"

using namespace mclab;
using namespace mclab::passive;
using mclab::testing::bernoulli_mask;
using mclab::testing::gaussian;

namespace {

double nuclear_objective(const Matrix& z, const Matrix& x, double tau) {
    return tau * Eigen::JacobiSVD<Matrix>(z).singularValues().sum() + 0.5 * (z - x).squaredNorm();
}

// Normal equations assembled entry by entry, solved with a full-pivot LU.
Matrix normal_equation_V(const Matrix& y, const IndexSet& mask, const Matrix& U, const Matrix& v_prev, double ridge) {
    const int r = static_cast<int>(U.cols());
    Matrix V = v_prev;
    for (int j = 0; j < y.cols(); ++j) {
        Matrix a = ridge * Matrix::Identity(r, r);
        Vector b = Vector::Zero(r);
        bool any = false;
        for (int i = 0; i < y.rows(); ++i)
            if (mask.contains(i, j)) {
                any = true;
                a += U.row(i).transpose() * U.row(i);
                b += y(i, j) * U.row(i).transpose();
            }
        if (any) V.row(j) = a.fullPivLu().solve(b).transpose();
    }
    return V;
}

IndexSet transposed(const IndexSet& s) {
    std::vector<Entry> t;
    for (const auto& e : s.entries()) t.push_back({e.col, e.row});
    return IndexSet(s.cols(), s.rows(), std::move(t));
}

}  // namespace

TEST_CASE("config validation") {
    const auto svt = SvtConfig::defaults_for(100, 100);
    CHECK(svt.tau == 500.0);
    CHECK(svt.delta == 1.0);
    CHECK(svt.epsilon == 1e-4);
    CHECK(svt.max_iters == 500);
    CHECK(SvtConfig::accelerated_step(100, 100, 3000) == doctest::Approx(4.0));
    SvtConfig bad = svt;
    bad.delta = SvtConfig::accelerated_step(100, 100, 3000);
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.delta = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = svt;
    bad.tau = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);

    AltMinConfig am;
    CHECK(am.max_iters == 50);
    CHECK(am.ridge == 1e-8);
    CHECK(am.tol == 1e-9);
    am.rank = 0;
    CHECK_THROWS_AS(am.validate(), Error);
    am.rank = 1;
    am.ridge = -1.0;
    CHECK_THROWS_AS(am.validate(), Error);
}

TEST_CASE("shrink_singular") {
    Matrix d = Matrix::Zero(2, 2);
    d.diagonal() << 3, 1;
    Matrix expect = Matrix::Zero(2, 2);
    expect(0, 0) = 1.0;
    CHECK((shrink_singular(d, 2.0) - expect).cwiseAbs().maxCoeff() < 1e-12);

    std::mt19937_64 rng(1);
    const Matrix x = gaussian(rng, 7, 5);
    CHECK((shrink_singular(x, 0.0) - x).cwiseAbs().maxCoeff() < 1e-8);
    const double s1 = Eigen::JacobiSVD<Matrix>(x).singularValues()(0);
    CHECK(shrink_singular(x, s1).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(shrink_singular(x, 2 * s1).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(shrink_singular(x, -1.0), Error);
    Matrix bad = x;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(shrink_singular(bad, 1.0), Error);
}

TEST_CASE("shrink_singular minimises tau ||Z||_* + 0.5 ||Z - X||^2") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 10; ++k) {
        const Matrix x = gaussian(rng, 5, 5);
        const double tau = 0.5 + k * 0.2;
        const Matrix z = shrink_singular(x, tau);
        const double best = nuclear_objective(z, x, tau);
        for (int p = 0; p < 1000; ++p) {
            const double scale = p % 2 ? 1e-2 : 1e-1;
            CHECK(nuclear_objective(z + scale * gaussian(rng, 5, 5), x, tau) >= best);
        }
    }
}

TEST_CASE("svt_complete") {
    std::mt19937_64 rng(3);
    const Matrix rank1 = gaussian(rng, 30, 1) * gaussian(rng, 1, 25);
    const auto full = svt_complete(MaskedMatrix::from_dense(rank1, IndexSet::full(30, 25)), SvtConfig::defaults_for(30, 25));
    CHECK(full.trace.converged);
    CHECK(full.trace.records.back().value < 1e-4);
    CHECK(full.trace.records.size() == static_cast<std::size_t>(full.trace.iters_used));

    const Matrix y = synth::gen_lowrank({60, 60, 2, synth::Kind::gaussian_lowrank, 0, 0, 4});
    const IndexSet mask = synth::mask_mcar(60, 60, 0.5, 5);
    auto cfg = SvtConfig::defaults_for(60, 60);
    cfg.max_iters = 300;
    const auto done = svt_complete(MaskedMatrix::from_dense(y, mask), cfg);
    CHECK(done.trace.iters_used <= cfg.max_iters);
    CHECK(done.trace.records.back().value <= done.trace.records.front().value);
    CHECK(rmse_unseen(y, done.estimate, mask) < 0.1 * std::sqrt(y.squaredNorm() / y.size()));

    CHECK_THROWS_AS(svt_complete(MaskedMatrix(IndexSet(3, 3), {}), SvtConfig::defaults_for(3, 3)), Error);
    CHECK_THROWS_AS(svt_complete(MaskedMatrix(IndexSet(3, 3, {{0, 0}}), {0.0}), SvtConfig::defaults_for(3, 3)), Error);
}

TEST_CASE("altmin_init") {
    const Matrix y = synth::gen_lowrank({20, 15, 3, synth::Kind::gaussian_lowrank, 0, 0, 6});
    const auto f = altmin_init(MaskedMatrix::from_dense(y, IndexSet::full(20, 15)), 3);
    CHECK(f.U.rows() == 20);
    CHECK(f.V.rows() == 15);
    CHECK(f.rank() == 3);
    CHECK((f.product() - y).cwiseAbs().maxCoeff() < 1e-6);
    CHECK_THROWS_AS(altmin_init(MaskedMatrix::from_dense(y, IndexSet::full(20, 15)), 16), Error);

    // Spectral start beats a random Gaussian start on average.
    double spectral = 0.0, random = 0.0;
    std::mt19937_64 rng(7);
    for (int s = 0; s < 10; ++s) {
        const Matrix z = synth::gen_lowrank({80, 80, 5, synth::Kind::gaussian_lowrank, 0, 0, 100u + s});
        const auto obs = MaskedMatrix::from_dense(z, synth::mask_mcar(80, 80, 0.3, 200u + s));
        spectral += altmin_objective(obs, altmin_init(obs, 5));
        random += altmin_objective(obs, {gaussian(rng, 80, 5), gaussian(rng, 80, 5)});
    }
    CHECK(spectral <= random);
}

TEST_CASE("altmin steps match independent normal-equation solves") {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 10; ++k) {
        const int n = 25, m = 18, r = 3;
        const Matrix y = gaussian(rng, n, m);
        const IndexSet mask = bernoulli_mask(rng, n, m, 0.5);
        const auto obs = MaskedMatrix::from_dense(y, mask);
        const Matrix U = gaussian(rng, n, r), V = gaussian(rng, m, r);
        for (double ridge : {0.0, 1e-8, 0.5}) {
            CHECK((altmin_step_V(obs, U, V, ridge) - normal_equation_V(y, mask, U, V, ridge)).cwiseAbs().maxCoeff() < 1e-8);
            const Matrix u_ref = normal_equation_V(y.transpose(), transposed(mask), V, U, ridge);
            CHECK((altmin_step_U(obs, V, U, ridge) - u_ref).cwiseAbs().maxCoeff() < 1e-8);
            // Transpose symmetry.
            const auto obs_t = MaskedMatrix::from_dense(y.transpose(), transposed(mask));
            CHECK((altmin_step_U(obs, V, U, ridge) - altmin_step_V(obs_t, V, U, ridge)).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("altmin step edge cases") {
    // r = 1, U all ones, column fully observed with constant c.
    const int n = 6;
    Matrix y = Matrix::Zero(n, 2);
    y.col(0).setConstant(2.5);
    std::vector<Entry> entries;
    for (int i = 0; i < n; ++i) entries.push_back({i, 0});
    const auto obs = MaskedMatrix::from_dense(y, IndexSet(n, 2, entries));
    const Matrix U = Matrix::Ones(n, 1);
    Matrix v_prev(2, 1);
    v_prev << 9.0, -4.0;
    const double ridge = 1e-8;
    const Matrix v = altmin_step_V(obs, U, v_prev, ridge);
    CHECK(v(0, 0) == doctest::Approx(2.5 * n / (n + ridge)).epsilon(1e-14));
    CHECK(v(1, 0) == -4.0);  // empty column keeps its previous factor

    Matrix u_prev = Matrix::Constant(n, 1, 3.0);
    Matrix vv = Matrix::Ones(2, 1);
    const Matrix u = altmin_step_U(MaskedMatrix::from_dense(y, IndexSet(n, 2, {{0, 0}})), vv, u_prev, ridge);
    CHECK(u(0, 0) == doctest::Approx(2.5));
    CHECK(u.bottomRows(n - 1) == u_prev.bottomRows(n - 1));
}

TEST_CASE("altmin_complete") {
    const Matrix y = synth::gen_lowrank({40, 30, 4, synth::Kind::gaussian_lowrank, 0, 0, 9});
    AltMinConfig cfg;
    cfg.rank = 4;
    cfg.max_iters = 1;
    const auto one = altmin_complete(MaskedMatrix::from_dense(y, IndexSet::full(40, 30)), cfg);
    CHECK(one.trace.records.front().value < 1e-12);

    const Matrix z = synth::gen_lowrank({100, 100, 5, synth::Kind::gaussian_lowrank, 0, 0, 10});
    const IndexSet mask = synth::mask_mcar(100, 100, 0.3, 11);
    const auto obs = MaskedMatrix::from_dense(z, mask);
    cfg.max_iters = 50;
    cfg.rank = 5;
    int calls = 0;
    FactorPair factors;
    const auto done = altmin_complete(obs, cfg, factors, [&](int iter, const FactorPair& f) {
        CHECK(iter == ++calls);
        CHECK(f.rank() == 5);
    });
    CHECK(calls == done.trace.iters_used);
    CHECK(done.trace.records.size() == static_cast<std::size_t>(done.trace.iters_used));
    CHECK(done.trace.iters_used <= cfg.max_iters);
    CHECK(factors.U.cols() == 5);
    CHECK(factors.V.cols() == 5);
    CHECK((factors.product() - done.estimate).cwiseAbs().maxCoeff() == 0.0);
    CHECK(rmse_unseen(z, done.estimate, mask) < 1e-4);
    const auto& rec = done.trace.records;
    CHECK(rec.back().value == doctest::Approx(altmin_objective(obs, factors)).epsilon(1e-12));

    // Deterministic traces.
    const auto again = altmin_complete(obs, cfg);
    REQUIRE(again.trace.records.size() == rec.size());
    for (std::size_t k = 0; k < rec.size(); ++k) CHECK(again.trace.records[k].value == rec[k].value);

    cfg.rank = 101;
    CHECK_THROWS_AS(altmin_complete(obs, cfg), Error);
}

TEST_CASE("altmin descent: the ridged objective never increases") {
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        const Matrix z = synth::gen_lowrank({80, 60, 4, synth::Kind::gaussian_lowrank, 0, 0.01, seed});
        const auto obs = MaskedMatrix::from_dense(z, synth::mask_mcar(80, 60, 0.35, seed + 1));
        const double ridge = 1e-8;
        FactorPair f = altmin_init(obs, 4);
        auto ridged = [&](const FactorPair& p) {
            return altmin_objective(obs, p) + ridge * (p.U.squaredNorm() + p.V.squaredNorm());
        };
        double previous = ridged(f);
        for (int k = 0; k < 20; ++k) {
            f.V = altmin_step_V(obs, f.U, f.V, ridge);
            double now = ridged(f);
            CHECK(now <= previous * (1 + 1e-9));
            previous = now;
            f.U = altmin_step_U(obs, f.V, f.U, ridge);
            now = ridged(f);
            CHECK(now <= previous * (1 + 1e-9));
            previous = now;
        }
    }
}
