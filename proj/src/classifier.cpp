#include "lmsss/classifier.hpp"

#include <algorithm>
#include <limits>

#include <fmt/core.h>

#include "lmsss/error.hpp"

namespace lmsss {

std::size_t ConfusionMatrix::total() const noexcept
{
    std::size_t t = 0;
    for (auto c : counts) {
        t += c;
    }
    return t;
}

std::size_t ConfusionMatrix::trace() const noexcept
{
    std::size_t t = 0;
    for (std::size_t i = 0; i < n_classes; ++i) {
        t += counts[i * n_classes + i];
    }
    return t;
}

double macro_f1(ConfusionMatrix const& confusion)
{
    std::size_t const c = confusion.n_classes;
    if (c == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
        std::size_t tp = confusion(k, k);
        std::size_t predicted = 0;
        std::size_t actual = 0;
        for (std::size_t j = 0; j < c; ++j) {
            predicted += confusion(j, k);
            actual += confusion(k, j);
        }
        double const precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        double const recall = actual > 0 ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
        if (precision + recall > 0.0) {
            sum += 2.0 * precision * recall / (precision + recall);
        }
    }
    return sum / static_cast<double>(c);
}

EvalResult summarize(ConfusionMatrix confusion, LossMetric metric)
{
    EvalResult r;
    auto const total = confusion.total();
    r.error_rate = total > 0 ? 1.0 - static_cast<double>(confusion.trace()) / static_cast<double>(total) : 0.0;
    r.macro_f1 = macro_f1(confusion);
    r.loss = metric == LossMetric::error_rate ? r.error_rate : 1.0 - r.macro_f1;
    r.confusion = std::move(confusion);
    return r;
}

namespace {

struct Neighbour {
    double distance;
    std::size_t index;
};

// Keeps the k smallest (distance, index) pairs. Candidates must be offered in
// ascending index order so that an equal distance never displaces an earlier one.
class NearestK {
public:
    explicit NearestK(std::size_t k) : k_(k) { items_.reserve(k + 1); }

    void clear() { items_.clear(); }

    void offer(double d, std::size_t idx)
    {
        if (items_.size() == k_ && !(d < items_.back().distance)) {
            return;
        }
        auto pos = std::upper_bound(items_.begin(), items_.end(), d,
            [](double v, Neighbour const& n) { return v < n.distance; });
        items_.insert(pos, Neighbour { d, idx });
        if (items_.size() > k_) {
            items_.pop_back();
        }
    }

    std::vector<Neighbour> const& items() const noexcept { return items_; }

private:
    std::size_t k_;
    std::vector<Neighbour> items_;
};

std::size_t vote(std::vector<Neighbour> const& neighbours, std::span<int const> labels, std::vector<std::size_t>& tally)
{
    std::fill(tally.begin(), tally.end(), 0);
    std::size_t best = 0;
    for (auto const& n : neighbours) {
        best = std::max(best, ++tally[static_cast<std::size_t>(labels[n.index])]);
    }
    for (auto const& n : neighbours) {
        auto const c = static_cast<std::size_t>(labels[n.index]);
        if (tally[c] == best) {
            return c;
        }
    }
    return 0;
}

void check_mask(FeatureMask const& mask, std::size_t n_features)
{
    if (mask.width() != n_features) {
        throw Error(fmt::format("mask width {} does not match {} features", mask.width(), n_features));
    }
    if (mask.empty()) {
        throw Error("empty feature mask");
    }
}

void check_k(std::size_t k, std::size_t n_train)
{
    if (k < 1 || k >= n_train) {
        throw Error(fmt::format("k = {} must satisfy 1 <= k < {} training instances", k, n_train));
    }
}

} // namespace

EvalResult loocv_eval(Dataset const& train, FeatureMask const& mask, ClassifierConfig const& cfg)
{
    check_mask(mask, train.n_features());
    std::size_t const n = train.n_instances();
    check_k(cfg.k, n);

    // Upper triangle of squared distances; features accumulate in ascending
    // column order so d(i,j) and d(j,i) are the same double.
    thread_local std::vector<double> dist;
    dist.assign(n * n, 0.0);
    for (auto const f : mask.indices()) {
        double const* col = train.column(f).data();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double const xi = col[i];
            double* row = dist.data() + i * n;
            for (std::size_t j = i + 1; j < n; ++j) {
                double const diff = xi - col[j];
                row[j] += diff * diff;
            }
        }
    }

    auto labels = train.labels();
    ConfusionMatrix confusion(train.n_classes());
    NearestK nearest(cfg.k);
    std::vector<std::size_t> tally(train.n_classes());
    for (std::size_t i = 0; i < n; ++i) {
        nearest.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                nearest.offer(i < j ? dist[i * n + j] : dist[j * n + i], j);
            }
        }
        auto const predicted = vote(nearest.items(), labels, tally);
        ++confusion(static_cast<std::size_t>(labels[i]), predicted);
    }
    return summarize(std::move(confusion), cfg.loss_metric);
}

EvalResult test_eval(Dataset const& train, Dataset const& test, FeatureMask const& mask, ClassifierConfig const& cfg)
{
    if (train.n_features() != test.n_features()) {
        throw Error(fmt::format("train has {} features, test has {}", train.n_features(), test.n_features()));
    }
    if (train.n_classes() != test.n_classes()) {
        throw Error("train and test disagree on the class table");
    }
    check_mask(mask, train.n_features());
    std::size_t const n = train.n_instances();
    std::size_t const m = test.n_instances();
    check_k(cfg.k, n);

    std::vector<double> dist(m * n, 0.0);
    for (auto const f : mask.indices()) {
        double const* tr = train.column(f).data();
        double const* te = test.column(f).data();
        for (std::size_t i = 0; i < m; ++i) {
            double const xi = te[i];
            double* row = dist.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                double const diff = xi - tr[j];
                row[j] += diff * diff;
            }
        }
    }

    ConfusionMatrix confusion(train.n_classes());
    NearestK nearest(cfg.k);
    std::vector<std::size_t> tally(train.n_classes());
    for (std::size_t i = 0; i < m; ++i) {
        nearest.clear();
        for (std::size_t j = 0; j < n; ++j) {
            nearest.offer(dist[i * n + j], j);
        }
        auto const predicted = vote(nearest.items(), train.labels(), tally);
        ++confusion(static_cast<std::size_t>(test.labels()[i]), predicted);
    }
    return summarize(std::move(confusion), cfg.loss_metric);
}

} // namespace lmsss
