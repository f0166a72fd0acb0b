#include "mclab/passive.hpp"

#include <chrono>
#include <cmath>

#include "mclab/kernels.hpp"

namespace mclab::passive {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::span<const double> flat(const Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> flat(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }

// Observed entries grouped by one axis: for line k, the (other index, value)
// pairs in [offset[k], offset[k+1]).
struct Adjacency {
    std::vector<std::size_t> offset;
    std::vector<int> index;
    std::vector<double> value;
};

Adjacency group_by(const MaskedMatrix& obs, bool by_column) {
    const int lines = by_column ? obs.cols() : obs.rows();
    const auto entries = obs.mask().entries();
    const auto values = obs.observed();
    Adjacency adj;
    adj.offset.assign(lines + 1, 0);
    for (const Entry& e : entries) ++adj.offset[(by_column ? e.col : e.row) + 1];
    for (int k = 0; k < lines; ++k) adj.offset[k + 1] += adj.offset[k];
    adj.index.resize(entries.size());
    adj.value.resize(entries.size());
    std::vector<std::size_t> cursor(adj.offset.begin(), adj.offset.end() - 1);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const int line = by_column ? entries[k].col : entries[k].row;
        const std::size_t slot = cursor[line]++;
        adj.index[slot] = by_column ? entries[k].row : entries[k].col;
        adj.value[slot] = values[k];
    }
    return adj;
}

// Solves one least-squares block per line of `adj` against the rows of `fixed`.
Matrix solve_lines(const Adjacency& adj, const Matrix& fixed, const Matrix& prev, double ridge) {
    const Eigen::Index r = fixed.cols();
    const auto lines = static_cast<Eigen::Index>(adj.offset.size() - 1);
    Matrix out = prev;
    Matrix gram(r, r);
    Vector rhs(r);
    for (Eigen::Index k = 0; k < lines; ++k) {
        const std::size_t begin = adj.offset[k];
        const std::size_t end = adj.offset[k + 1];
        if (begin == end) continue;
        gram.setZero();
        rhs.setZero();
        for (std::size_t s = begin; s < end; ++s) {
            const auto row = fixed.row(adj.index[s]);
            gram.selfadjointView<Eigen::Lower>().rankUpdate(row.transpose());
            rhs.noalias() += adj.value[s] * row.transpose();
        }
        gram.diagonal().array() += ridge;
        out.row(k) = gram.selfadjointView<Eigen::Lower>().ldlt().solve(rhs).transpose();
    }
    return out;
}

void check_factor(const Matrix& f, Eigen::Index rows, const char* what) {
    if (f.rows() != rows) throw Error(std::string(what) + ": factor has wrong number of rows");
}

double objective_with(const MaskedMatrix& obs, const Matrix& Ut, const Matrix& Vt) {
    const auto entries = obs.mask().entries();
    const auto values = obs.observed();
    const auto r = static_cast<std::size_t>(Ut.rows());
    double total = 0.0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const double pred = kernels::dot({Ut.col(entries[k].row).data(), r}, {Vt.col(entries[k].col).data(), r});
        const double d = pred - values[k];
        total += d * d;
    }
    return total;
}

}  // namespace

// Configs ----------------------------------------------------------------

SvtConfig SvtConfig::defaults_for(int n, int m) {
    SvtConfig cfg;
    cfg.tau = 5.0 * (n + m) / 2.0;
    return cfg;
}

double SvtConfig::accelerated_step(int n, int m, std::size_t observed) {
    if (observed == 0) throw Error("accelerated_step: empty mask");
    return 1.2 * static_cast<double>(n) * m / static_cast<double>(observed);
}

void SvtConfig::validate() const {
    if (!(tau > 0.0)) throw Error("svt: tau must be > 0");
    if (!(delta > 0.0 && delta < 2.0))
        throw Error("svt: step size delta=" + std::to_string(delta) + " outside (0, 2), iteration may diverge");
    if (!(epsilon > 0.0)) throw Error("svt: epsilon must be > 0");
    if (max_iters < 1) throw Error("svt: max_iters must be >= 1");
}

void AltMinConfig::validate() const {
    if (rank < 1) throw Error("altmin: rank must be >= 1");
    if (!(ridge >= 0.0)) throw Error("altmin: ridge must be >= 0");
    if (max_iters < 1) throw Error("altmin: max_iters must be >= 1");
    if (!(tol >= 0.0)) throw Error("altmin: tol must be >= 0");
}

// SVT --------------------------------------------------------------------

Matrix shrink_singular(const Matrix& x, double tau) {
    if (!(tau >= 0.0)) throw Error("shrink_singular: tau must be >= 0");
    require_finite(x, "shrink_singular input");
    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < s.size() && s(keep) > tau) ++keep;
    if (keep == 0) return Matrix::Zero(x.rows(), x.cols());
    const Vector shrunk = s.head(keep).array() - tau;
    return svd.matrixU().leftCols(keep) * shrunk.asDiagonal() * svd.matrixV().leftCols(keep).transpose();
}

Completion svt_complete(const MaskedMatrix& obs, const SvtConfig& cfg) {
    cfg.validate();
    if (obs.mask().empty()) throw Error("svt: no observed entries");
    const double obs_norm = obs.observed_norm();
    if (obs_norm == 0.0) throw Error("svt: ||Y_obs||_F = 0, stopping rule undefined");

    const auto start = Clock::now();
    const Matrix y = obs.zero_filled();
    const Matrix w = obs.mask().indicator();
    Matrix u = y;
    Matrix x;
    Completion out;
    for (int k = 1; k <= cfg.max_iters; ++k) {
        x = shrink_singular(u, cfg.tau);
        const double rel = std::sqrt(kernels::masked_sq_diff(flat(y), flat(x), flat(w))) / obs_norm;
        out.trace.records.push_back({k, rel, seconds_since(start)});
        out.trace.iters_used = k;
        if (rel < cfg.epsilon) {
            out.trace.converged = true;
            break;
        }
        kernels::masked_step(flat(u), flat(y), flat(x), flat(w), cfg.delta);
    }
    out.estimate = std::move(x);
    return out;
}

// AltMin -----------------------------------------------------------------

FactorPair altmin_init(const MaskedMatrix& obs, int r) {
    if (r < 1 || r > std::min(obs.rows(), obs.cols()))
        throw Error("altmin_init: rank " + std::to_string(r) + " outside [1, min(n,m)]");
    const SvdTriple svd = truncated_svd(obs.zero_filled(), r);
    return {svd.U, svd.V * svd.S.asDiagonal()};
}

Matrix altmin_step_V(const MaskedMatrix& obs, const Matrix& U, const Matrix& v_prev, double ridge) {
    check_factor(U, obs.rows(), "altmin_step_V");
    check_factor(v_prev, obs.cols(), "altmin_step_V");
    if (U.cols() != v_prev.cols()) throw Error("altmin_step_V: factor ranks differ");
    return solve_lines(group_by(obs, true), U, v_prev, ridge);
}

Matrix altmin_step_U(const MaskedMatrix& obs, const Matrix& V, const Matrix& u_prev, double ridge) {
    check_factor(V, obs.cols(), "altmin_step_U");
    check_factor(u_prev, obs.rows(), "altmin_step_U");
    if (V.cols() != u_prev.cols()) throw Error("altmin_step_U: factor ranks differ");
    return solve_lines(group_by(obs, false), V, u_prev, ridge);
}

double altmin_objective(const MaskedMatrix& obs, const FactorPair& factors) {
    check_factor(factors.U, obs.rows(), "altmin_objective");
    check_factor(factors.V, obs.cols(), "altmin_objective");
    return objective_with(obs, factors.U.transpose(), factors.V.transpose());
}

Completion altmin_complete(const MaskedMatrix& obs, const AltMinConfig& cfg, const AltMinObserver& observer) {
    FactorPair unused;
    return altmin_complete(obs, cfg, unused, observer);
}

Completion altmin_complete(const MaskedMatrix& obs, const AltMinConfig& cfg, FactorPair& factors_out,
                           const AltMinObserver& observer) {
    cfg.validate();
    const auto start = Clock::now();
    FactorPair f = altmin_init(obs, cfg.rank);
    const Adjacency by_col = group_by(obs, true);
    const Adjacency by_row = group_by(obs, false);

    Completion out;
    double previous = altmin_objective(obs, f);
    for (int k = 1; k <= cfg.max_iters; ++k) {
        f.V = solve_lines(by_col, f.U, f.V, cfg.ridge);
        f.U = solve_lines(by_row, f.V, f.U, cfg.ridge);
        const double current = altmin_objective(obs, f);
        out.trace.records.push_back({k, current, seconds_since(start)});
        out.trace.iters_used = k;
        if (observer) observer(k, f);
        const double change = std::abs(previous - current) / std::max(previous, 1e-300);
        if (current == 0.0 || change < cfg.tol) {
            out.trace.converged = true;
            break;
        }
        previous = current;
    }
    out.estimate = f.product();
    factors_out = std::move(f);
    return out;
}

}  // namespace mclab::passive
