#include "mclab/core.hpp"

#include <algorithm>
#include <cmath>

#include "mclab/kernels.hpp"

namespace mclab {

namespace {

std::span<const double> flat(const Matrix& m) {
    return {m.data(), static_cast<std::size_t>(m.size())};
}

void check_dims(int rows, int cols) {
    if (rows <= 0 || cols <= 0) throw Error("matrix dimensions must be positive");
}

}  // namespace

void require_finite(const Eigen::Ref<const Matrix>& x, std::string_view what) {
    if (!x.allFinite()) throw Error(std::string(what) + ": non-finite entry");
}

// IndexSet ---------------------------------------------------------------

IndexSet::IndexSet(int rows, int cols)
    : rows_(rows), cols_(cols), member_(static_cast<std::size_t>(rows) * cols, 0) {
    check_dims(rows, cols);
}

IndexSet::IndexSet(int rows, int cols, std::vector<Entry> entries) : IndexSet(rows, cols) {
    for (const Entry& e : entries) {
        check_range(e.row, e.col);
        auto& bit = member_[static_cast<std::size_t>(e.row) * cols_ + e.col];
        if (bit) {
            throw Error("duplicate index (" + std::to_string(e.row) + "," + std::to_string(e.col) + ")");
        }
        bit = 1;
    }
    std::sort(entries.begin(), entries.end());
    entries_ = std::move(entries);
}

IndexSet IndexSet::full(int rows, int cols) {
    IndexSet s(rows, cols);
    s.entries_.reserve(static_cast<std::size_t>(rows) * cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) s.entries_.push_back({i, j});
    std::fill(s.member_.begin(), s.member_.end(), 1);
    return s;
}

void IndexSet::check_range(int i, int j) const {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_) {
        throw Error("index (" + std::to_string(i) + "," + std::to_string(j) + ") out of range for " +
                    std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

bool IndexSet::contains(int i, int j) const {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_) return false;
    return member_[static_cast<std::size_t>(i) * cols_ + j] != 0;
}

bool IndexSet::insert(int i, int j) {
    check_range(i, j);
    auto& bit = member_[static_cast<std::size_t>(i) * cols_ + j];
    if (bit) return false;
    bit = 1;
    const Entry e{i, j};
    entries_.insert(std::lower_bound(entries_.begin(), entries_.end(), e), e);
    return true;
}

IndexSet IndexSet::complement() const {
    IndexSet out(rows_, cols_);
    out.entries_.reserve(static_cast<std::size_t>(rows_) * cols_ - entries_.size());
    for (int i = 0; i < rows_; ++i) {
        for (int j = 0; j < cols_; ++j) {
            if (!contains(i, j)) {
                out.entries_.push_back({i, j});
                out.member_[static_cast<std::size_t>(i) * cols_ + j] = 1;
            }
        }
    }
    return out;
}

Matrix IndexSet::indicator() const {
    Matrix w = Matrix::Zero(rows_, cols_);
    for (const Entry& e : entries_) w(e.row, e.col) = 1.0;
    return w;
}

std::vector<int> IndexSet::row_counts() const {
    std::vector<int> counts(rows_, 0);
    for (const Entry& e : entries_) ++counts[e.row];
    return counts;
}

std::vector<int> IndexSet::col_counts() const {
    std::vector<int> counts(cols_, 0);
    for (const Entry& e : entries_) ++counts[e.col];
    return counts;
}

// MaskedMatrix -----------------------------------------------------------

MaskedMatrix::MaskedMatrix(IndexSet mask, std::vector<double> observed)
    : mask_(std::move(mask)), observed_(std::move(observed)) {
    if (observed_.size() != mask_.size()) throw Error("observed values do not match mask size");
    for (double v : observed_)
        if (!std::isfinite(v)) throw Error("observed values: non-finite entry");
}

MaskedMatrix MaskedMatrix::from_dense(const Matrix& y, IndexSet mask) {
    if (y.rows() != mask.rows() || y.cols() != mask.cols()) throw Error("matrix and mask dimensions differ");
    std::vector<double> values;
    values.reserve(mask.size());
    for (const Entry& e : mask.entries()) values.push_back(y(e.row, e.col));
    return MaskedMatrix(std::move(mask), std::move(values));
}

Matrix MaskedMatrix::zero_filled() const {
    Matrix y = Matrix::Zero(rows(), cols());
    const auto entries = mask_.entries();
    for (std::size_t k = 0; k < entries.size(); ++k) y(entries[k].row, entries[k].col) = observed_[k];
    return y;
}

double MaskedMatrix::observed_norm() const {
    return std::sqrt(kernels::dot(observed_, observed_));
}

// EntryOracle ------------------------------------------------------------

EntryOracle::EntryOracle(Matrix hidden) : hidden_(std::move(hidden)) {
    check_dims(static_cast<int>(hidden_.rows()), static_cast<int>(hidden_.cols()));
    require_finite(hidden_, "oracle matrix");
    seen_.assign(static_cast<std::size_t>(hidden_.size()), 0);
}

EntryOracle::EntryOracle(Matrix hidden, Matrix cost_field) : EntryOracle(std::move(hidden)) {
    if (cost_field.rows() != hidden_.rows() || cost_field.cols() != hidden_.cols())
        throw Error("cost field dimensions differ from oracle matrix");
    require_finite(cost_field, "cost field");
    cost_ = std::move(cost_field);
}

double EntryOracle::query(int i, int j) {
    if (i < 0 || i >= rows() || j < 0 || j >= cols())
        throw Error("oracle query (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
    auto& seen = seen_[static_cast<std::size_t>(i) * cols() + j];
    if (!seen) {
        seen = 1;
        log_.push_back({i, j});
        if (cost_) cumulative_cost_ += (*cost_)(i, j);
    }
    return hidden_(i, j);
}

bool EntryOracle::queried(int i, int j) const {
    if (i < 0 || i >= rows() || j < 0 || j >= cols()) return false;
    return seen_[static_cast<std::size_t>(i) * cols() + j] != 0;
}

MaskedMatrix EntryOracle::observations() const {
    return MaskedMatrix::from_dense(hidden_, IndexSet(rows(), cols(), log_));
}

// Operations -------------------------------------------------------------

Matrix project_omega(const Matrix& x, const IndexSet& omega) {
    if (x.rows() != omega.rows() || x.cols() != omega.cols())
        throw Error("project_omega: matrix is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                    " but mask is " + std::to_string(omega.rows()) + "x" + std::to_string(omega.cols()));
    const Matrix w = omega.indicator();
    Matrix out(x.rows(), x.cols());
    kernels::mask_mul(flat(x), flat(w), {out.data(), static_cast<std::size_t>(out.size())});
    return out;
}

double rmse_unseen(const Matrix& truth, const Matrix& estimate, const IndexSet& omega) {
    if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols() || truth.rows() != omega.rows() ||
        truth.cols() != omega.cols())
        throw Error("rmse_unseen: dimension mismatch");
    const std::size_t unseen = static_cast<std::size_t>(truth.size()) - omega.size();
    if (unseen == 0) throw Error("rmse_unseen: every entry is observed, metric undefined");
    const Matrix w = omega.complement().indicator();
    return std::sqrt(kernels::masked_sq_diff(flat(truth), flat(estimate), flat(w)) / static_cast<double>(unseen));
}

Coherence coherence(const SvdTriple& svd, int r) {
    if (r <= 0 || r > svd.U.cols() || r > svd.V.cols())
        throw Error("coherence: rank " + std::to_string(r) + " outside [1, " + std::to_string(svd.U.cols()) + "]");
    const auto n = static_cast<double>(svd.U.rows());
    const auto m = static_cast<double>(svd.V.rows());
    const double row_max = svd.U.leftCols(r).rowwise().squaredNorm().maxCoeff();
    const double col_max = svd.V.leftCols(r).rowwise().squaredNorm().maxCoeff();
    return {n / r * row_max, m / r * col_max};
}

SvdTriple truncated_svd(const Matrix& x, int r) {
    const int k = static_cast<int>(std::min(x.rows(), x.cols()));
    if (r < 1 || r > k) throw Error("truncated_svd: rank " + std::to_string(r) + " outside [1, " + std::to_string(k) + "]");
    require_finite(x, "truncated_svd input");
    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU().leftCols(r), svd.singularValues().head(r), svd.matrixV().leftCols(r)};
}

}  // namespace mclab
