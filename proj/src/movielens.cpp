#include "mclab/movielens.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "mclab/io.hpp"

namespace mclab::movielens {

namespace {

double sample_std(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double predict(const Matrix& estimate, const Entry& e, bool clip) {
    const double v = estimate(e.row, e.col);
    return clip ? std::clamp(v, 1.0, 5.0) : v;
}

}  // namespace

std::vector<RatingRecord> parse_udata(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<RatingRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, '\t')) fields.push_back(field);
        if (fields.size() != 4) throw Error(where + ": expected 4 tab-separated fields, got " + std::to_string(fields.size()));
        RatingRecord r;
        r.user = static_cast<int>(io::parse_int(fields[0], where));
        r.item = static_cast<int>(io::parse_int(fields[1], where));
        r.rating = io::parse_double(fields[2], where);
        r.timestamp = io::parse_int(fields[3], where);
        if (r.user < 1 || r.item < 1) throw Error(where + ": user and item ids must be >= 1");
        if (!(r.rating >= 1.0 && r.rating <= 5.0)) throw Error(where + ": rating outside [1, 5]");
        records.push_back(r);
    }
    return records;
}

void write_udata(const std::vector<RatingRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    for (const auto& r : records)
        out << r.user << '\t' << r.item << '\t' << io::format_double(r.rating) << '\t' << r.timestamp << '\n';
}

MaskedMatrix build_matrix(const std::vector<RatingRecord>& records) {
    if (records.empty()) throw Error("build_matrix: no records");
    int n = 0;
    int m = 0;
    for (const auto& r : records) {
        n = std::max(n, r.user);
        m = std::max(m, r.item);
    }
    std::vector<Entry> entries;
    entries.reserve(records.size());
    for (const auto& r : records) entries.push_back({r.user - 1, r.item - 1});
    // IndexSet rejects duplicate (user, item) pairs.
    IndexSet mask(n, m, entries);
    Matrix dense = Matrix::Zero(n, m);
    for (const auto& r : records) dense(r.user - 1, r.item - 1) = r.rating;
    return MaskedMatrix::from_dense(dense, std::move(mask));
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t count, int k, std::uint64_t seed) {
    if (k < 2) throw Error("cross-validation needs at least 2 folds");
    if (count < static_cast<std::size_t>(k)) throw Error("fewer observations than folds");
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> folds(k);
    for (std::size_t p = 0; p < count; ++p) folds[p % k].push_back(order[p]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

const CvSummary& CvTable::best() const {
    if (summary.empty()) throw Error("empty cross-validation table");
    return *std::min_element(summary.begin(), summary.end(),
                             [](const CvSummary& a, const CvSummary& b) { return a.test_mean < b.test_mean; });
}

CvTable crossval_rank(const MaskedMatrix& obs, const std::vector<int>& ranks, const passive::AltMinConfig& cfg,
                      const CvOptions& options) {
    if (ranks.empty()) throw Error("crossval_rank: empty rank grid");
    for (int r : ranks)
        if (r < 1 || r > std::min(obs.rows(), obs.cols()))
            throw Error("crossval_rank: rank " + std::to_string(r) + " exceeds min(n,m)");

    const auto entries = obs.mask().entries();
    const auto values = obs.observed();
    const auto folds = make_folds(entries.size(), options.folds, options.seed);

    struct Split {
        MaskedMatrix train;
        std::vector<Entry> test;
        std::vector<double> test_values;
    };
    std::vector<Split> splits;
    CvTable table;
    for (const auto& fold : folds) {
        std::vector<std::uint8_t> held(entries.size(), 0);
        for (std::size_t p : fold) held[p] = 1;
        std::vector<Entry> train_entries;
        std::vector<double> train_values;
        Split s;
        for (std::size_t p = 0; p < entries.size(); ++p) {
            if (held[p]) {
                s.test.push_back(entries[p]);
                s.test_values.push_back(values[p]);
            } else {
                train_entries.push_back(entries[p]);
                train_values.push_back(values[p]);
            }
        }
        s.train = MaskedMatrix(IndexSet(obs.rows(), obs.cols(), std::move(train_entries)), std::move(train_values));

        const double mu = mean_of({s.train.observed().begin(), s.train.observed().end()});
        double acc = 0.0;
        for (double v : s.test_values) acc += (v - mu) * (v - mu);
        table.baseline.push_back(std::sqrt(acc / static_cast<double>(s.test_values.size())));
        splits.push_back(std::move(s));
    }

    for (int r : ranks) {
        passive::AltMinConfig run = cfg;
        run.rank = r;
        std::vector<double> train_scores;
        std::vector<double> test_scores;
        for (std::size_t f = 0; f < splits.size(); ++f) {
            const Split& s = splits[f];
            const Matrix est = passive::altmin_complete(s.train, run).estimate;

            double train_acc = 0.0;
            const auto tr = s.train.mask().entries();
            const auto tv = s.train.observed();
            for (std::size_t p = 0; p < tr.size(); ++p) {
                const double d = predict(est, tr[p], options.clip) - tv[p];
                train_acc += d * d;
            }
            double test_acc = 0.0;
            for (std::size_t p = 0; p < s.test.size(); ++p) {
                const double d = predict(est, s.test[p], options.clip) - s.test_values[p];
                test_acc += d * d;
            }
            CvRow row{r, static_cast<int>(f), std::sqrt(train_acc / static_cast<double>(tr.size())),
                      std::sqrt(test_acc / static_cast<double>(s.test.size()))};
            train_scores.push_back(row.train_rmse);
            test_scores.push_back(row.test_rmse);
            table.rows.push_back(row);
        }
        CvSummary sum;
        sum.rank = r;
        sum.train_mean = mean_of(train_scores);
        sum.train_std = sample_std(train_scores, sum.train_mean);
        sum.test_mean = mean_of(test_scores);
        sum.test_std = sample_std(test_scores, sum.test_mean);
        table.summary.push_back(sum);
    }
    return table;
}

void export_heatmap(const MaskedMatrix& obs, int row_begin, int row_end, int col_begin, int col_end,
                    const std::filesystem::path& path) {
    if (row_begin < 0 || col_begin < 0 || row_end > obs.rows() || col_end > obs.cols() || row_begin >= row_end ||
        col_begin >= col_end)
        throw Error("export_heatmap: range [" + std::to_string(row_begin) + "," + std::to_string(row_end) + ") x [" +
                    std::to_string(col_begin) + "," + std::to_string(col_end) + ") out of bounds for " +
                    std::to_string(obs.rows()) + "x" + std::to_string(obs.cols()));
    const Matrix dense = obs.zero_filled();
    io::write_matrix_csv(dense.block(row_begin, col_begin, row_end - row_begin, col_end - col_begin), path);
}

void write_cv(const CvTable& table, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p);
        if (!out) throw Error("cannot open " + p.string() + " for writing");
        return out;
    };
    auto rows = open(dir / "cv_results.csv");
    rows << kCvResultsHeader << '\n';
    for (const auto& r : table.rows)
        rows << r.rank << ',' << r.fold << ',' << io::format_double(r.train_rmse) << ','
             << io::format_double(r.test_rmse) << '\n';
    auto agg = open(dir / "cv_aggregate.csv");
    agg << kCvAggregateHeader << '\n';
    for (const auto& s : table.summary)
        agg << s.rank << ',' << io::format_double(s.train_mean) << ',' << io::format_double(s.train_std) << ','
            << io::format_double(s.test_mean) << ',' << io::format_double(s.test_std) << '\n';
    auto base = open(dir / "cv_baseline.csv");
    base << kCvBaselineHeader << '\n';
    for (std::size_t f = 0; f < table.baseline.size(); ++f) base << f << ',' << io::format_double(table.baseline[f]) << '\n';
    if (!rows || !agg || !base) throw Error("write failed in " + dir.string());
}

std::vector<int> parse_rank_grid(const std::string& text) {
    std::vector<int> ranks;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const auto lo = io::parse_int(text.substr(0, dots), "rank grid");
        const auto hi = io::parse_int(text.substr(dots + 2), "rank grid");
        if (lo < 1 || hi < lo) throw Error("rank grid '" + text + "' must satisfy 1 <= lo <= hi");
        for (auto r = lo; r <= hi; ++r) ranks.push_back(static_cast<int>(r));
    } else {
        for (const auto& f : io::split_csv_line(text)) {
            const auto r = io::parse_int(f, "rank grid");
            if (r < 1) throw Error("rank grid entries must be >= 1");
            ranks.push_back(static_cast<int>(r));
        }
    }
    if (ranks.empty()) throw Error("empty rank grid");
    return ranks;
}

}  // namespace mclab::movielens
