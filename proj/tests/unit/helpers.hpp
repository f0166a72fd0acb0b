#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mclab/core.hpp"

namespace mclab::testing {

inline Matrix gaussian(std::mt19937_64& rng, int n, int m) {
    std::normal_distribution<double> normal;
    Matrix x(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) x(i, j) = normal(rng);
    return x;
}

inline IndexSet bernoulli_mask(std::mt19937_64& rng, int n, int m, double p) {
    std::bernoulli_distribution keep(p);
    std::vector<Entry> entries;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (keep(rng)) entries.push_back({i, j});
    return IndexSet(n, m, std::move(entries));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("mclab_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace mclab::testing
