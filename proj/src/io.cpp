#include "mclab/io.hpp"

#include <charconv>
#include <fstream>
#include <limits>

namespace mclab::io {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_double(const std::string& field, const std::string& context) {
    const std::string s = trim(field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        // from_chars rejects "nan"/"inf" spellings written by some tools.
        if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
        throw Error(context + ": cannot parse '" + field + "' as a number");
    }
    return v;
}

long long parse_int(const std::string& field, const std::string& context) {
    const std::string s = trim(field);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw Error(context + ": cannot parse '" + field + "' as an integer");
    return v;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error("format_double failed");
    return {buf, ptr};
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        std::vector<double> row;
        for (const auto& f : split_csv_line(line)) row.push_back(parse_double(f, where));
        if (!rows.empty() && row.size() != rows.front().size())
            throw Error(where + ": expected " + std::to_string(rows.front().size()) + " columns, got " +
                        std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(path.string() + ": empty matrix file");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    require_finite(m, path.string());
    return m;
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

IndexSet read_mask(const std::filesystem::path& path, int rows, int cols) {
    auto in = open_in(path);
    std::vector<Entry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) throw Error(where + ": expected 'i,j'");
        entries.push_back({static_cast<int>(parse_int(fields[0], where)), static_cast<int>(parse_int(fields[1], where))});
    }
    return IndexSet(rows, cols, std::move(entries));
}

void write_mask(const IndexSet& mask, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const Entry& e : mask.entries()) out << e.row << ',' << e.col << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace mclab::io
