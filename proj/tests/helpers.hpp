#ifndef LMSSS_TESTS_HELPERS_HPP
#define LMSSS_TESTS_HELPERS_HPP

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "lmsss/dataset.hpp"

namespace testutil {

// Row-major input, class names "0".."C-1".
inline lmsss::Dataset make(std::vector<std::vector<double>> const& rows, std::vector<int> const& labels, int classes = 0)
{
    std::size_t n = rows.size(), d = rows.empty() ? 0 : rows[0].size();
    std::vector<double> cm(n * d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) cm[c * n + r] = rows[r][c];
    for (int l : labels) classes = std::max(classes, l + 1);
    std::vector<std::string> names;
    for (int c = 0; c < classes; ++c) names.push_back(std::to_string(c));
    std::vector<std::size_t> ids(d);
    for (std::size_t c = 0; c < d; ++c) ids[c] = c;
    return lmsss::Dataset(std::move(cm), n, d, labels, names, ids);
}

// Two Gaussian blobs in `dims` dimensions, centres 0 and 10, sd 0.5.
inline lmsss::Dataset blobs(std::size_t per_class, std::size_t dims, unsigned seed)
{
    std::mt19937 gen(seed);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < per_class; ++i) {
            std::vector<double> r;
            for (std::size_t f = 0; f < dims; ++f) r.push_back(10.0 * c + noise(gen));
            rows.push_back(r);
            labels.push_back(c);
        }
    return make(rows, labels);
}

inline std::filesystem::path temp_dir(std::string const& name)
{
    auto p = std::filesystem::temp_directory_path() / ("lmsss_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline void write_text(std::filesystem::path const& p, std::string const& s)
{
    std::ofstream(p, std::ios::binary) << s;
}

inline std::string read_text(std::filesystem::path const& p)
{
    std::ifstream f(p, std::ios::binary);
    return { std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>() };
}

} // namespace testutil

#endif
