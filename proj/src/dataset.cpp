#include "lmsss/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/core.h>

#include "lmsss/error.hpp"
#include "lmsss/rng.hpp"

namespace lmsss {

Dataset::Dataset(std::vector<double> column_major, std::size_t n_instances, std::size_t n_features,
    std::vector<int> labels, std::vector<std::string> class_names, std::vector<std::size_t> column_ids)
    : values_(std::move(column_major))
    , n_instances_(n_instances)
    , n_features_(n_features)
    , labels_(std::move(labels))
    , class_names_(std::move(class_names))
    , column_ids_(std::move(column_ids))
{
    if (values_.size() != n_instances_ * n_features_) {
        throw Error(fmt::format("dataset: {} values for a {}x{} matrix", values_.size(), n_instances_, n_features_));
    }
    if (labels_.size() != n_instances_) {
        throw Error(fmt::format("dataset: {} labels for {} instances", labels_.size(), n_instances_));
    }
    if (column_ids_.size() != n_features_) {
        throw Error(fmt::format("dataset: {} column ids for {} features", column_ids_.size(), n_features_));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw Error(fmt::format("dataset: non-finite value at row {}, column {}", i % n_instances_, i / n_instances_));
        }
    }
    for (int label : labels_) {
        if (label < 0 || static_cast<std::size_t>(label) >= class_names_.size()) {
            throw Error(fmt::format("dataset: label {} outside 0..{}", label, class_names_.size()));
        }
    }
    std::unordered_set<std::size_t> seen(column_ids_.begin(), column_ids_.end());
    if (seen.size() != column_ids_.size()) {
        throw Error("dataset: duplicate column ids");
    }
}

std::vector<std::size_t> Dataset::class_counts() const
{
    std::vector<std::size_t> counts(n_classes(), 0);
    for (int label : labels_) {
        ++counts[static_cast<std::size_t>(label)];
    }
    return counts;
}

Dataset Dataset::select_rows(std::span<std::size_t const> rows) const
{
    std::vector<double> values(rows.size() * n_features_);
    std::vector<int> labels(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= n_instances_) {
            throw Error(fmt::format("select_rows: row {} out of range", rows[r]));
        }
        labels[r] = labels_[rows[r]];
    }
    for (std::size_t c = 0; c < n_features_; ++c) {
        auto col = column(c);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            values[c * rows.size() + r] = col[rows[r]];
        }
    }
    return Dataset(std::move(values), rows.size(), n_features_, std::move(labels), class_names_, column_ids_);
}

namespace {

// RFC-4180 record reader: quoted fields, doubled quotes, CRLF, embedded newlines.
class CsvReader {
public:
    CsvReader(std::istream& in, char delimiter) : in_(in), delim_(delimiter) { }

    bool next(std::vector<std::string>& fields)
    {
        fields.clear();
        if (in_.peek() == std::char_traits<char>::eof()) {
            return false;
        }
        ++line_;
        std::string field;
        bool quoted = false;
        bool any = false;
        for (;;) {
            int const ch = in_.get();
            if (ch == std::char_traits<char>::eof()) {
                if (quoted) {
                    throw Error(fmt::format("csv: unterminated quoted field at line {}", line_));
                }
                break;
            }
            any = true;
            char const c = static_cast<char>(ch);
            if (quoted) {
                if (c == '"') {
                    if (in_.peek() == '"') {
                        field.push_back('"');
                        in_.get();
                    } else {
                        quoted = false;
                    }
                } else {
                    if (c == '\n') {
                        ++line_;
                    }
                    field.push_back(c);
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == delim_) {
                fields.push_back(std::move(field));
                field.clear();
            } else if (c == '\n') {
                break;
            } else if (c == '\r') {
                if (in_.peek() == '\n') {
                    in_.get();
                }
                break;
            } else {
                field.push_back(c);
            }
        }
        fields.push_back(std::move(field));
        // A bare trailing newline yields one empty field; treat it as a blank line.
        if (!any || (fields.size() == 1 && fields[0].empty())) {
            return next(fields);
        }
        return true;
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::istream& in_;
    char delim_;
    std::size_t line_ { 0 };
};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    return s;
}

// nullopt for a missing value (empty or NaN spelling); throws for garbage.
std::optional<double> parse_cell(std::string_view raw, std::size_t line, std::size_t col)
{
    auto s = trim(raw);
    if (s.empty() || s == "NaN" || s == "nan" || s == "NA" || s == "?") {
        return std::nullopt;
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(fmt::format("csv: non-numeric feature cell '{}' at line {}, column {}", raw, line, col));
    }
    if (!std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

} // namespace

Dataset load_csv(std::filesystem::path const& path, CsvOptions const& options)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(fmt::format("cannot open '{}'", path.string()));
    }
    CsvReader reader(in, options.delimiter);
    std::vector<std::string> fields;
    std::vector<std::string> header;
    if (options.header) {
        if (!reader.next(header)) {
            throw Error(fmt::format("'{}': empty file", path.string()));
        }
    }

    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;
    while (reader.next(fields)) {
        rows.push_back(fields);
        lines.push_back(reader.line());
    }
    if (rows.size() < 2) {
        throw Error(fmt::format("'{}': need at least 2 data rows, found {}", path.string(), rows.size()));
    }
    std::size_t const width = options.header ? header.size() : rows.front().size();
    if (width < 2) {
        throw Error(fmt::format("'{}': need a label column and at least one feature", path.string()));
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != width) {
            throw Error(fmt::format("'{}': ragged row at line {} ({} fields, expected {})", path.string(), lines[r],
                rows[r].size(), width));
        }
    }

    std::size_t label_col = width - 1;
    if (auto const* idx = std::get_if<std::size_t>(&options.label_column)) {
        if (*idx >= width) {
            throw Error(fmt::format("'{}': label column {} out of range ({} columns)", path.string(), *idx, width));
        }
        label_col = *idx;
    } else if (auto const* name = std::get_if<std::string>(&options.label_column)) {
        if (!options.header) {
            throw Error("label column given by name but the file has no header");
        }
        auto it = std::find(header.begin(), header.end(), *name);
        if (it == header.end()) {
            throw Error(fmt::format("'{}': no column named '{}'", path.string(), *name));
        }
        label_col = static_cast<std::size_t>(it - header.begin());
    }

    std::size_t const n = rows.size();
    std::size_t const d = width - 1;
    std::vector<double> values(n * d);
    std::vector<int> labels(n);
    std::vector<std::string> class_names;
    std::unordered_map<std::string, int> codes;
    std::vector<std::size_t> missing; // flat positions awaiting imputation

    for (std::size_t r = 0; r < n; ++r) {
        std::size_t c = 0;
        for (std::size_t f = 0; f < width; ++f) {
            if (f == label_col) {
                auto key = std::string(trim(rows[r][f]));
                auto [it, inserted] = codes.emplace(key, static_cast<int>(class_names.size()));
                if (inserted) {
                    class_names.push_back(key);
                }
                labels[r] = it->second;
                continue;
            }
            auto v = parse_cell(rows[r][f], lines[r], f + 1);
            if (!v) {
                if (!options.impute_mean) {
                    throw Error(fmt::format("'{}': missing or non-finite value at line {}, column {}", path.string(),
                        lines[r], f + 1));
                }
                missing.push_back(c * n + r);
                values[c * n + r] = std::numeric_limits<double>::quiet_NaN();
            } else {
                values[c * n + r] = *v;
            }
            ++c;
        }
    }
    if (class_names.size() < 2) {
        throw Error(fmt::format("'{}': fewer than 2 classes", path.string()));
    }

    if (!missing.empty()) {
        for (std::size_t c = 0; c < d; ++c) {
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t r = 0; r < n; ++r) {
                if (!std::isnan(values[c * n + r])) {
                    sum += values[c * n + r];
                    ++count;
                }
            }
            double const mean = count > 0 ? sum / static_cast<double>(count) : 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                if (std::isnan(values[c * n + r])) {
                    values[c * n + r] = mean;
                }
            }
        }
    }

    std::vector<std::size_t> ids(d);
    std::iota(ids.begin(), ids.end(), std::size_t { 0 });
    Dataset out(std::move(values), n, d, std::move(labels), std::move(class_names), std::move(ids));
    if (options.normalize) {
        return MinMaxScaler::fit(out).apply(out);
    }
    return out;
}

void write_csv(Dataset const& d, std::filesystem::path const& path, char delimiter)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(fmt::format("cannot write '{}'", path.string()));
    }
    auto quote = [&](std::string const& s) {
        if (s.find_first_of(std::string { delimiter, '"', '\n', '\r' }) == std::string::npos) {
            return s;
        }
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') {
                q += '"';
            }
            q += c;
        }
        return q + '"';
    };
    for (std::size_t c = 0; c < d.n_features(); ++c) {
        out << 'f' << d.column_ids()[c] << delimiter;
    }
    out << "label\n";
    for (std::size_t r = 0; r < d.n_instances(); ++r) {
        for (std::size_t c = 0; c < d.n_features(); ++c) {
            out << fmt::format("{:.17g}", d.at(r, c)) << delimiter;
        }
        out << quote(d.class_names()[static_cast<std::size_t>(d.labels()[r])]) << '\n';
    }
    if (!out) {
        throw Error(fmt::format("write to '{}' failed", path.string()));
    }
}

MinMaxScaler MinMaxScaler::fit(Dataset const& d)
{
    MinMaxScaler s;
    s.lo.resize(d.n_features());
    s.hi.resize(d.n_features());
    for (std::size_t c = 0; c < d.n_features(); ++c) {
        auto col = d.column(c);
        auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        s.lo[c] = *lo;
        s.hi[c] = *hi;
    }
    return s;
}

Dataset MinMaxScaler::apply(Dataset const& d) const
{
    if (lo.size() != d.n_features()) {
        throw Error(fmt::format("scaler fitted on {} features applied to {}", lo.size(), d.n_features()));
    }
    std::vector<double> values(d.values().begin(), d.values().end());
    std::size_t const n = d.n_instances();
    for (std::size_t c = 0; c < d.n_features(); ++c) {
        double const range = hi[c] - lo[c];
        for (std::size_t r = 0; r < n; ++r) {
            double& v = values[c * n + r];
            v = range > 0.0 ? (v - lo[c]) / range : 0.0;
        }
    }
    return Dataset(std::move(values), n, d.n_features(), std::vector<int>(d.labels().begin(), d.labels().end()),
        d.class_names(), std::vector<std::size_t>(d.column_ids().begin(), d.column_ids().end()));
}

SplitPair stratified_split(Dataset const& d, double train_fraction, std::uint64_t seed)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(fmt::format("stratified_split: train fraction {} not in (0,1)", train_fraction));
    }
    auto const counts = d.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] < 2) {
            throw Error(fmt::format("stratified_split: class '{}' has {} instance(s), need at least 2",
                d.class_names()[c], counts[c]));
        }
    }

    std::size_t const n_classes = counts.size();
    std::vector<std::size_t> take(n_classes);
    std::vector<double> frac(n_classes);
    std::size_t floor_sum = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        double const target = train_fraction * static_cast<double>(counts[c]);
        take[c] = static_cast<std::size_t>(std::floor(target));
        frac[c] = target - static_cast<double>(take[c]);
        floor_sum += take[c];
    }
    auto const total = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(d.n_instances())));
    std::vector<std::size_t> order(n_classes);
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return frac[a] > frac[b]; });
    for (std::size_t i = 0; floor_sum < total && i < n_classes; ++i, ++floor_sum) {
        ++take[order[i]];
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        take[c] = std::clamp<std::size_t>(take[c], 1, counts[c] - 1);
    }

    std::vector<std::vector<std::size_t>> members(n_classes);
    for (std::size_t r = 0; r < d.n_instances(); ++r) {
        members[static_cast<std::size_t>(d.labels()[r])].push_back(r);
    }
    Rng rng(seed);
    SplitPair split;
    split.seed = seed;
    for (std::size_t c = 0; c < n_classes; ++c) {
        rng.shuffle(members[c].begin(), members[c].end());
        split.train_rows.insert(split.train_rows.end(), members[c].begin(), members[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
        split.test_rows.insert(split.test_rows.end(), members[c].begin() + static_cast<std::ptrdiff_t>(take[c]), members[c].end());
    }
    std::sort(split.train_rows.begin(), split.train_rows.end());
    std::sort(split.test_rows.begin(), split.test_rows.end());
    split.train = d.select_rows(split.train_rows);
    split.test = d.select_rows(split.test_rows);
    return split;
}

std::uint64_t partition_hash(SplitPair const& split)
{
    std::uint64_t h = hash_string("partition");
    for (auto r : split.train_rows) {
        h = hash_combine(h, r);
    }
    h = hash_combine(h, ~std::uint64_t { 0 });
    for (auto r : split.test_rows) {
        h = hash_combine(h, r);
    }
    return h;
}

Dataset project_columns(Dataset const& d, std::span<std::size_t const> indices)
{
    std::vector<bool> used(d.n_features(), false);
    std::size_t const n = d.n_instances();
    std::vector<double> values(n * indices.size());
    std::vector<std::size_t> ids(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        auto const c = indices[i];
        if (c >= d.n_features()) {
            throw Error(fmt::format("project_columns: index {} out of range ({} features)", c, d.n_features()));
        }
        if (used[c]) {
            throw Error(fmt::format("project_columns: duplicate index {}", c));
        }
        used[c] = true;
        auto col = d.column(c);
        std::copy(col.begin(), col.end(), values.begin() + static_cast<std::ptrdiff_t>(i * n));
        ids[i] = d.column_ids()[c];
    }
    return Dataset(std::move(values), n, indices.size(), std::vector<int>(d.labels().begin(), d.labels().end()),
        d.class_names(), std::move(ids));
}

SyntheticData generate_synthetic(std::size_t n_instances, std::size_t n_features, std::size_t n_informative,
    std::uint64_t seed)
{
    if (n_informative == 0 || n_informative >= n_features) {
        throw Error(fmt::format("generate_synthetic: need 0 < informative ({}) < features ({})", n_informative, n_features));
    }
    if (n_instances < 40) {
        throw Error(fmt::format("generate_synthetic: need at least 40 instances, got {}", n_instances));
    }
    Rng rng(seed);

    std::vector<std::size_t> perm(n_features);
    std::iota(perm.begin(), perm.end(), std::size_t { 0 });
    rng.shuffle(perm.begin(), perm.end());
    std::vector<std::size_t> informative(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_informative));
    std::sort(informative.begin(), informative.end());

    std::vector<double> weights(n_informative);
    for (auto& w : weights) {
        w = 0.5 + rng.uniform();
    }

    std::size_t const n = n_instances;
    std::vector<double> values(n * n_features);
    std::vector<double> latent(n);
    for (auto& z : latent) {
        z = rng.normal();
    }
    std::vector<bool> is_informative(n_features, false);
    for (auto c : informative) {
        is_informative[c] = true;
    }
    for (std::size_t c = 0; c < n_features; ++c) {
        for (std::size_t r = 0; r < n; ++r) {
            double const noise = rng.normal();
            values[c * n + r] = is_informative[c] ? 0.6 * latent[r] + 0.8 * noise : noise;
        }
    }

    std::vector<double> score(n, 0.0);
    for (std::size_t k = 0; k < n_informative; ++k) {
        std::size_t const c = informative[k];
        for (std::size_t r = 0; r < n; ++r) {
            score[r] += weights[k] * values[c * n + r];
        }
    }
    std::vector<double> sorted = score;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2), sorted.end());
    double const threshold = sorted[n / 2];
    std::vector<int> labels(n);
    for (std::size_t r = 0; r < n; ++r) {
        labels[r] = score[r] >= threshold ? 1 : 0;
    }
    // Codes follow first appearance, as load_csv would assign them.
    if (labels[0] == 1) {
        for (auto& l : labels) {
            l = 1 - l;
        }
    }

    std::vector<std::size_t> ids(n_features);
    std::iota(ids.begin(), ids.end(), std::size_t { 0 });
    Dataset raw(std::move(values), n, n_features, std::move(labels), { "0", "1" }, std::move(ids));
    return { MinMaxScaler::fit(raw).apply(raw), std::move(informative) };
}

} // namespace lmsss
