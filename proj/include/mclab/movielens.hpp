#pragma once

// MovieLens 100K (u.data) ingestion and rank cross-validation for AltMin.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mclab/core.hpp"
#include "mclab/passive.hpp"

namespace mclab::movielens {

struct RatingRecord {
    int user = 0;  // 1-based, as in the file
    int item = 0;
    double rating = 0.0;
    long long timestamp = 0;

    friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

// Tab-separated "user item rating timestamp" lines.
std::vector<RatingRecord> parse_udata(const std::filesystem::path& path);
void write_udata(const std::vector<RatingRecord>& records, const std::filesystem::path& path);

// n = max user id, m = max item id, zero-based Ω.
MaskedMatrix build_matrix(const std::vector<RatingRecord>& records);

// Ω split into k folds of sizes differing by at most one.
std::vector<std::vector<std::size_t>> make_folds(std::size_t count, int k, std::uint64_t seed);

struct CvRow {
    int rank = 0;
    int fold = 0;
    double train_rmse = 0.0;
    double test_rmse = 0.0;
};

struct CvSummary {
    int rank = 0;
    double train_mean = 0.0;
    double train_std = 0.0;
    double test_mean = 0.0;
    double test_std = 0.0;
};

struct CvTable {
    std::vector<CvRow> rows;          // ordered by (rank, fold)
    std::vector<CvSummary> summary;   // one per rank
    std::vector<double> baseline;     // global-mean predictor test RMSE per fold

    const CvSummary& best() const;    // smallest mean test RMSE
};

struct CvOptions {
    int folds = 5;
    bool clip = false;  // clip predictions to [1, 5] before scoring
    std::uint64_t seed = 0;
};

// AltMin trained on Ω minus each fold (cfg.rank is replaced per grid point).
CvTable crossval_rank(const MaskedMatrix& obs, const std::vector<int>& ranks, const passive::AltMinConfig& cfg,
                      const CvOptions& options);

inline constexpr const char* kCvResultsHeader = "rank,fold,train_rmse,test_rmse";
inline constexpr const char* kCvAggregateHeader = "rank,train_mean,train_std,test_mean,test_std";
inline constexpr const char* kCvBaselineHeader = "fold,test_rmse";

// cv_results.csv, cv_aggregate.csv and cv_baseline.csv in dir.
void write_cv(const CvTable& table, const std::filesystem::path& dir);

// "1..30", "3" or "1,2,5,10"; ranges are inclusive.
std::vector<int> parse_rank_grid(const std::string& text);

// Dense CSV of rows [row_begin, row_end) x cols [col_begin, col_end), 0 for missing.
void export_heatmap(const MaskedMatrix& obs, int row_begin, int row_end, int col_begin, int col_end,
                    const std::filesystem::path& path);

}  // namespace mclab::movielens
