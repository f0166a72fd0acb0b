#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mclab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Row-major storage, used where linear index order must be (i, then j).
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// All recoverable failures (bad arguments, bad files, undefined metrics).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws Error naming `what` if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Matrix>& x, std::string_view what);

struct Entry {
    int row = 0;
    int col = 0;

    friend auto operator<=>(const Entry&, const Entry&) = default;
};

// An observation pattern Ω over an n x m grid. Entries are kept sorted in
// row-major order, with an n*m membership map for O(1) lookups.
class IndexSet {
public:
    IndexSet() = default;
    IndexSet(int rows, int cols);
    // Throws on out-of-range or duplicate pairs.
    IndexSet(int rows, int cols, std::vector<Entry> entries);

    static IndexSet full(int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    bool contains(int i, int j) const;
    bool contains(Entry e) const { return contains(e.row, e.col); }
    std::span<const Entry> entries() const { return entries_; }

    // Returns false (and changes nothing) if already present.
    bool insert(int i, int j);

    IndexSet complement() const;
    // n x m matrix of 0/1 weights.
    Matrix indicator() const;
    std::vector<int> row_counts() const;
    std::vector<int> col_counts() const;

    friend bool operator==(const IndexSet& a, const IndexSet& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
    }

private:
    void check_range(int i, int j) const;

    int rows_ = 0;
    int cols_ = 0;
    std::vector<Entry> entries_;
    std::vector<std::uint8_t> member_;
};

// Y_obs: the observed values on Ω, stored aligned with mask().entries().
class MaskedMatrix {
public:
    MaskedMatrix() = default;
    MaskedMatrix(IndexSet mask, std::vector<double> observed);

    static MaskedMatrix from_dense(const Matrix& y, IndexSet mask);

    const IndexSet& mask() const { return mask_; }
    std::span<const double> observed() const { return observed_; }
    int rows() const { return mask_.rows(); }
    int cols() const { return mask_.cols(); }

    // P_Ω(Y) with zeros at missing entries.
    Matrix zero_filled() const;
    double observed_norm() const;

private:
    IndexSet mask_;
    std::vector<double> observed_;
};

struct SvdTriple {
    Matrix U;  // n x k, orthonormal columns
    Vector S;  // k, nonincreasing, nonnegative
    Matrix V;  // m x k, orthonormal columns

    int rank() const { return static_cast<int>(S.size()); }
    Matrix reconstruct() const { return U * S.asDiagonal() * V.transpose(); }
};

// Query access to a hidden matrix, logging each distinct entry once.
// Repeated queries return the cached value at no extra cost.
class EntryOracle {
public:
    explicit EntryOracle(Matrix hidden);
    EntryOracle(Matrix hidden, Matrix cost_field);

    double query(int i, int j);

    int rows() const { return static_cast<int>(hidden_.rows()); }
    int cols() const { return static_cast<int>(hidden_.cols()); }
    bool queried(int i, int j) const;
    std::span<const Entry> query_log() const { return log_; }
    std::size_t distinct_queries() const { return log_.size(); }
    double cumulative_cost() const { return cumulative_cost_; }
    bool has_cost_field() const { return cost_.has_value(); }

    // Ground truth, for scoring a completion after the fact.
    const Matrix& hidden() const { return hidden_; }
    // Values of all queried entries as a masked matrix.
    MaskedMatrix observations() const;

private:
    Matrix hidden_;
    std::optional<Matrix> cost_;
    std::vector<Entry> log_;
    std::vector<std::uint8_t> seen_;
    double cumulative_cost_ = 0.0;
};

Matrix project_omega(const Matrix& x, const IndexSet& omega);

// Root mean squared error over the complement of omega.
double rmse_unseen(const Matrix& truth, const Matrix& estimate, const IndexSet& omega);

struct Coherence {
    double row = 0.0;
    double col = 0.0;
    double mu0() const { return row > col ? row : col; }
};

// (n/r) max_i ||U^T e_i||^2 and (m/r) max_j ||V^T e_j||^2 over the first r
// singular vectors.
Coherence coherence(const SvdTriple& svd, int r);

// Top-r singular triple of x.
SvdTriple truncated_svd(const Matrix& x, int r);

}  // namespace mclab
