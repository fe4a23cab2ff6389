#include "lmsss/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "lmsss/error.hpp"

namespace lmsss {

namespace {

// Midranks (1-based) of the pooled sample, plus the tie term sum(t^3 - t).
std::vector<double> pooled_ranks(std::span<double const> a, std::span<double const> b, double& tie_term)
{
    std::size_t const n = a.size() + b.size();
    std::vector<double> values(a.begin(), a.end());
    values.insert(values.end(), b.begin(), b.end());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return values[x] < values[y]; });
    std::vector<double> ranks(n);
    tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        double const mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = mid;
        }
        double const t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    return ranks;
}

double upper_normal(double z)
{
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

double normal_pdf(double z)
{
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
}

} // namespace

RankSum rank_sum_test(std::span<double const> a, std::span<double const> b)
{
    if (a.size() < 5 || b.size() < 5) {
        throw Error(fmt::format("rank-sum test needs at least 5 values per sample, got {} and {}", a.size(), b.size()));
    }
    double tie_term = 0.0;
    auto const ranks = pooled_ranks(a, b, tie_term);
    double const m = static_cast<double>(a.size());
    double const n = static_cast<double>(b.size());
    double const total = m + n;
    double r1 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        r1 += ranks[i];
    }
    RankSum out;
    out.u = r1 - m * (m + 1.0) / 2.0;
    double const mean = m * n / 2.0;
    double const var = m * n / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if (!(var > 0.0)) {
        return out; // every value tied
    }
    double const deviation = std::max(0.0, std::abs(out.u - mean) - 0.5);
    double const z = deviation / std::sqrt(var);
    // Fix-Hodges Edgeworth correction: excess kurtosis of U under the null.
    double const kurtosis = -6.0 * (m * m + n * n + m * n + m + n) / (5.0 * m * n * (m + n + 1.0));
    double const tail = upper_normal(z) + normal_pdf(z) * (kurtosis / 24.0) * (z * z * z - 3.0 * z);
    out.z = out.u >= mean ? z : -z;
    out.p = std::clamp(2.0 * tail, 0.0, 1.0);
    return out;
}

double wilcoxon_rank_sum_exact(std::span<double const> a, std::span<double const> b)
{
    std::size_t const m = a.size();
    std::size_t const total = a.size() + b.size();
    if (m == 0 || b.empty() || total > 20) {
        throw Error(fmt::format("exact rank-sum: sample sizes {} and {} outside 1..20 total", a.size(), b.size()));
    }
    double tie_term = 0.0;
    auto const ranks = pooled_ranks(a, b, tie_term);
    double observed = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        observed += ranks[i];
    }
    double const expected = static_cast<double>(m) * static_cast<double>(total + 1) / 2.0;
    double const threshold = std::abs(observed - expected) - 1e-9;

    std::size_t extreme = 0;
    std::size_t count = 0;
    std::vector<std::size_t> pick(m);
    std::iota(pick.begin(), pick.end(), std::size_t { 0 });
    for (;;) {
        double w = 0.0;
        for (auto i : pick) {
            w += ranks[i];
        }
        ++count;
        if (std::abs(w - expected) >= threshold) {
            ++extreme;
        }
        // next combination in lexicographic order
        std::size_t k = m;
        while (k > 0 && pick[k - 1] == total - m + (k - 1)) {
            --k;
        }
        if (k == 0) {
            break;
        }
        ++pick[k - 1];
        for (std::size_t j = k; j < m; ++j) {
            pick[j] = pick[j - 1] + 1;
        }
    }
    return static_cast<double>(extreme) / static_cast<double>(count);
}

std::string_view to_string(Metric m)
{
    switch (m) {
    case Metric::hv:
        return "hv";
    case Metric::igd:
        return "igd";
    case Metric::mce:
        return "mce";
    }
    return "?";
}

bool higher_is_better(Metric m)
{
    return m == Metric::hv;
}

std::string_view to_string(Mark m)
{
    switch (m) {
    case Mark::better:
        return "better";
    case Mark::worse:
        return "worse";
    case Mark::no_difference:
        return "no_difference";
    }
    return "?";
}

ComparisonCell const& Table::cell(std::string const& dataset, Variant v) const
{
    for (auto const& c : cells) {
        if (c.dataset == dataset && c.variant == v) {
            return c;
        }
    }
    throw Error(fmt::format("table has no cell ({}, {})", dataset, to_string(v)));
}

void assign_igd(std::vector<RunReport>& reports)
{
    std::map<std::string, std::vector<std::vector<ObjectiveVector>>> fronts;
    for (auto const& r : reports) {
        std::vector<ObjectiveVector> pts;
        for (auto const& e : r.test_front) {
            pts.push_back(e.objectives);
        }
        fronts[r.dataset].push_back(std::move(pts));
    }
    std::map<std::string, std::vector<ObjectiveVector>> reference;
    for (auto const& [name, list] : fronts) {
        reference[name] = merge_reference_front(list);
    }
    for (auto& r : reports) {
        std::vector<ObjectiveVector> pts;
        for (auto const& e : r.test_front) {
            pts.push_back(e.objectives);
        }
        r.igd = igd(pts, reference.at(r.dataset));
    }
}

namespace {

double metric_value(RunReport const& r, Metric m)
{
    switch (m) {
    case Metric::hv:
        return r.hv;
    case Metric::igd:
        return *r.igd;
    case Metric::mce:
        return r.mce;
    }
    return 0.0;
}

} // namespace

Table tabulate(std::vector<RunReport> reports, Metric metric, Variant reference, double alpha)
{
    if (metric == Metric::igd
        && std::any_of(reports.begin(), reports.end(), [](auto const& r) { return !r.igd.has_value(); })) {
        assign_igd(reports);
    }
    Table t;
    t.metric = metric;
    t.reference = reference;
    t.alpha = alpha;
    std::map<std::pair<std::string, Variant>, std::vector<double>> samples;
    std::vector<bool> seen_variant(4, false);
    for (auto const& r : reports) {
        if (std::find(t.datasets.begin(), t.datasets.end(), r.dataset) == t.datasets.end()) {
            t.datasets.push_back(r.dataset);
        }
        seen_variant[static_cast<std::size_t>(r.variant)] = true;
        samples[{ r.dataset, r.variant }].push_back(metric_value(r, metric));
    }
    for (std::size_t v = 0; v < seen_variant.size(); ++v) {
        if (seen_variant[v]) {
            t.variants.push_back(static_cast<Variant>(v));
        }
    }
    if (t.variants.size() < 2) {
        throw Error("tabulate: need at least two variants");
    }
    if (!seen_variant[static_cast<std::size_t>(reference)]) {
        throw Error(fmt::format("tabulate: reference variant {} has no runs", to_string(reference)));
    }
    std::size_t runs = 0;
    for (auto const& d : t.datasets) {
        for (auto v : t.variants) {
            auto it = samples.find({ d, v });
            std::size_t const k = it == samples.end() ? 0 : it->second.size();
            if (runs == 0) {
                runs = k;
            }
            if (k != runs || k == 0) {
                throw Error(fmt::format("tabulate: unbalanced run counts ({} has {} runs of {}, expected {})", d, k,
                    to_string(v), runs));
            }
        }
    }

    for (auto const& d : t.datasets) {
        auto const& ref = samples.at({ d, reference });
        for (auto v : t.variants) {
            auto values = samples.at({ d, v });
            std::sort(values.begin(), values.end());
            ComparisonCell c;
            c.dataset = d;
            c.variant = v;
            double const k = static_cast<double>(values.size());
            c.mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
            double ss = 0.0;
            for (double x : values) {
                ss += (x - c.mean) * (x - c.mean);
            }
            c.std = values.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
            std::size_t const mid = values.size() / 2;
            c.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
            if (v != reference && values.size() >= 5) {
                auto const test = rank_sum_test(values, ref);
                if (test.p < alpha) {
                    bool const larger = test.u > 0.5 * k * static_cast<double>(ref.size());
                    c.mark = larger == higher_is_better(metric) ? Mark::better : Mark::worse;
                } else {
                    c.mark = Mark::no_difference;
                }
                auto& s = t.summary[v];
                switch (*c.mark) {
                case Mark::worse:
                    ++s.wins;
                    break;
                case Mark::better:
                    ++s.losses;
                    break;
                case Mark::no_difference:
                    ++s.ties;
                    break;
                }
            }
            t.cells.push_back(std::move(c));
        }
    }
    return t;
}

std::string to_csv(Table const& t)
{
    std::string out = "dataset,variant,mean,std,mark\n";
    for (auto const& c : t.cells) {
        out += fmt::format("{},{},{:.10g},{:.10g},{}\n", c.dataset, to_string(c.variant), c.mean, c.std,
            c.mark ? to_string(*c.mark) : std::string_view {});
    }
    return out;
}

nlohmann::json to_json(Table const& t)
{
    nlohmann::json rows = nlohmann::json::array();
    for (auto const& d : t.datasets) {
        nlohmann::json row { { "dataset", d } };
        for (auto v : t.variants) {
            auto const& c = t.cell(d, v);
            row[std::string(to_string(v))] = { { "mean", c.mean }, { "std", c.std }, { "median", c.median },
                { "mark", c.mark ? nlohmann::json(to_string(*c.mark)) : nlohmann::json(nullptr) } };
        }
        rows.push_back(std::move(row));
    }
    nlohmann::json summary = nlohmann::json::object();
    for (auto const& [v, s] : t.summary) {
        summary[std::string(to_string(v))] = { { "wins", s.wins }, { "ties", s.ties }, { "losses", s.losses } };
    }
    return { { "metric", to_string(t.metric) }, { "reference", to_string(t.reference) }, { "alpha", t.alpha },
        { "rows", rows }, { "summary", summary } };
}

} // namespace lmsss
