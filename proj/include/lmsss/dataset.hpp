#ifndef LMSSS_DATASET_HPP
#define LMSSS_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lmsss {

// Instance x feature matrix with class labels. Storage is column-major: the
// classifier and the MIC scorer both walk one feature at a time.
//
// column_ids maps each column back to its index in the originating dataset and
// is composed through every projection, so masks over a shrunk space can be
// re-expressed in original feature indices.
class Dataset {
public:
    Dataset() = default;

    // Validates shape, finiteness, label range and column-id uniqueness.
    Dataset(std::vector<double> column_major, std::size_t n_instances, std::size_t n_features,
        std::vector<int> labels, std::vector<std::string> class_names, std::vector<std::size_t> column_ids);

    std::size_t n_instances() const noexcept { return n_instances_; }
    std::size_t n_features() const noexcept { return n_features_; }
    std::size_t n_classes() const noexcept { return class_names_.size(); }

    double at(std::size_t row, std::size_t col) const noexcept { return values_[col * n_instances_ + row]; }
    std::span<double const> column(std::size_t col) const noexcept
    {
        return { values_.data() + col * n_instances_, n_instances_ };
    }
    std::span<double const> values() const noexcept { return values_; }
    std::span<int const> labels() const noexcept { return labels_; }
    std::span<std::size_t const> column_ids() const noexcept { return column_ids_; }
    std::vector<std::string> const& class_names() const noexcept { return class_names_; }

    // Per-class instance counts, indexed by label code.
    std::vector<std::size_t> class_counts() const;

    // Rows in the given order; labels and class table are preserved.
    Dataset select_rows(std::span<std::size_t const> rows) const;

    friend bool operator==(Dataset const&, Dataset const&) = default;

private:
    std::vector<double> values_;
    std::size_t n_instances_ { 0 };
    std::size_t n_features_ { 0 };
    std::vector<int> labels_;
    std::vector<std::string> class_names_;
    std::vector<std::size_t> column_ids_;
};

struct CsvOptions {
    // monostate selects the last column.
    std::variant<std::monostate, std::size_t, std::string> label_column {};
    bool header { true };
    char delimiter { ',' };
    // Min-max scale every feature to [0,1]. Leave off when a train/test split
    // follows; fit a MinMaxScaler on the train partition instead.
    bool normalize { true };
    // Replace empty/NaN feature cells with the column mean instead of failing.
    bool impute_mean { false };
};

Dataset load_csv(std::filesystem::path const& path, CsvOptions const& options = {});

// Header row is f<column_id>...,label; labels are written as class names.
void write_csv(Dataset const& d, std::filesystem::path const& path, char delimiter = ',');

struct MinMaxScaler {
    std::vector<double> lo;
    std::vector<double> hi;

    static MinMaxScaler fit(Dataset const& d);
    // Constant columns (hi == lo) map to 0.
    Dataset apply(Dataset const& d) const;
};

struct SplitPair {
    Dataset train;
    Dataset test;
    std::uint64_t seed { 0 };
    std::vector<std::size_t> train_rows; // ascending row positions in the source
    std::vector<std::size_t> test_rows;
};

// Per-class floor of fraction * n_c, remainders handed to the largest
// fractional parts; every class keeps at least one instance on each side.
SplitPair stratified_split(Dataset const& d, double train_fraction, std::uint64_t seed);

// Stable digest of the train/test membership.
std::uint64_t partition_hash(SplitPair const& split);

Dataset project_columns(Dataset const& d, std::span<std::size_t const> indices);

struct SyntheticData {
    Dataset data;
    std::vector<std::size_t> informative; // ascending
};

// Informative columns share a latent factor; the label is 1 when a random
// positive-weighted sum of the informative columns exceeds its median. All
// other columns are independent standard normals. Features are min-max scaled.
SyntheticData generate_synthetic(std::size_t n_instances, std::size_t n_features, std::size_t n_informative,
    std::uint64_t seed);

} // namespace lmsss

#endif
