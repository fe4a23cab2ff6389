#include "lmsss/mic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/core.h>

#include "lmsss/error.hpp"
#include "lmsss/parallel.hpp"

namespace lmsss {

double grid_bound(std::size_t n, double alpha)
{
    return std::max(4.0, std::pow(static_cast<double>(n), alpha));
}

namespace {

double sorted_sum(std::vector<double>& terms)
{
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) {
        s += t;
    }
    return s;
}

double clamp_unit(double v)
{
    return std::clamp(v, 0.0, 1.0);
}

// One axis sorted once (stable, so equal values keep input order), then cut
// into equal-frequency bins on demand.
class RankedAxis {
public:
    explicit RankedAxis(std::span<double const> v) : values_(v), order_(v.size())
    {
        std::iota(order_.begin(), order_.end(), std::size_t { 0 });
        std::stable_sort(order_.begin(), order_.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    }

    std::size_t size() const noexcept { return order_.size(); }
    std::size_t at_rank(std::size_t r) const noexcept { return order_[r]; }

    // Start positions (in rank order) of up to `target` non-empty bins. A cut
    // that lands inside a run of equal values moves past the last of them.
    std::vector<std::size_t> starts(std::size_t target) const
    {
        std::size_t const n = order_.size();
        std::vector<std::size_t> out { 0 };
        for (std::size_t k = 1; k < target; ++k) {
            std::size_t b = k * n / target;
            while (b < n && b > 0 && values_[order_[b]] == values_[order_[b - 1]]) {
                ++b;
            }
            if (b > out.back() && b < n) {
                out.push_back(b);
            }
        }
        return out;
    }

    // Bin id per original element.
    std::vector<std::size_t> bins(std::size_t target, std::size_t& n_bins) const
    {
        auto const s = starts(target);
        n_bins = s.size();
        std::vector<std::size_t> out(order_.size());
        std::size_t b = 0;
        for (std::size_t r = 0; r < order_.size(); ++r) {
            if (b + 1 < s.size() && r == s[b + 1]) {
                ++b;
            }
            out[order_[r]] = b;
        }
        return out;
    }

private:
    std::span<double const> values_;
    std::vector<std::size_t> order_;
};

double mi_of_bins(std::vector<std::size_t> const& xb, std::size_t px, std::vector<std::size_t> const& yb, std::size_t qy)
{
    std::vector<double> joint(px * qy, 0.0);
    for (std::size_t i = 0; i < xb.size(); ++i) {
        joint[xb[i] * qy + yb[i]] += 1.0;
    }
    return mutual_information(joint, px, qy);
}

double xlogx(double v)
{
    return v > 0.0 ? v * std::log(v) : 0.0;
}

// Best I(P;Q) over partitions P of the x axis into at most p bins whose edges
// are drawn from `clumps` (rank-order starts). yb holds the fixed Q bin per
// element. Uses I = H(Q) - H(Q|P), with H(Q|P) additive over x bins.
double optimize_x_axis(RankedAxis const& x, std::vector<std::size_t> const& clumps, std::vector<std::size_t> const& yb,
    std::size_t qy, std::size_t p)
{
    std::size_t const n = x.size();
    std::size_t const k = clumps.size();
    // cum[j * qy + y] = count of y-bin y among the first j clumps
    std::vector<double> cum((k + 1) * qy, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t const end = j + 1 < k ? clumps[j + 1] : n;
        std::copy_n(cum.begin() + static_cast<std::ptrdiff_t>(j * qy), qy, cum.begin() + static_cast<std::ptrdiff_t>((j + 1) * qy));
        for (std::size_t r = clumps[j]; r < end; ++r) {
            cum[(j + 1) * qy + yb[x.at_rank(r)]] += 1.0;
        }
    }
    // cost(s,t) = sum_y c log c - m log m for the bin spanning clumps [s, t).
    std::vector<double> cost((k + 1) * (k + 1), 0.0);
    for (std::size_t s = 0; s < k; ++s) {
        for (std::size_t t = s + 1; t <= k; ++t) {
            double acc = 0.0;
            double m = 0.0;
            for (std::size_t y = 0; y < qy; ++y) {
                double const c = cum[t * qy + y] - cum[s * qy + y];
                acc += xlogx(c);
                m += c;
            }
            cost[s * (k + 1) + t] = acc - xlogx(m);
        }
    }
    std::size_t const max_bins = std::min(p, k);
    double const neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> prev(k + 1, neg_inf);
    std::vector<double> cur(k + 1, neg_inf);
    for (std::size_t t = 1; t <= k; ++t) {
        prev[t] = cost[t];
    }
    double best = prev[k];
    for (std::size_t l = 2; l <= max_bins; ++l) {
        std::fill(cur.begin(), cur.end(), neg_inf);
        for (std::size_t t = l; t <= k; ++t) {
            double b = neg_inf;
            for (std::size_t s = l - 1; s < t; ++s) {
                b = std::max(b, prev[s] + cost[s * (k + 1) + t]);
            }
            cur[t] = b;
        }
        std::swap(prev, cur);
        best = std::max(best, prev[k]);
    }
    std::vector<double> marg(qy, 0.0);
    for (auto yv : yb) {
        marg[yv] += 1.0;
    }
    double hy = 0.0;
    for (double c : marg) {
        hy += xlogx(c);
    }
    double const dn = static_cast<double>(n);
    double const mi = (best - hy) / dn + std::log(dn);
    return std::max(0.0, mi);
}

double grid_value(RankedAxis const& x, std::vector<std::size_t> const& yb, std::size_t qy, std::size_t p, std::size_t q,
    bool refine, std::size_t clumps_factor)
{
    std::size_t px = 0;
    auto const xb = x.bins(p, px);
    double best = mi_of_bins(xb, px, yb, qy);
    if (refine && clumps_factor > 1) {
        auto const clumps = x.starts(std::min(x.size(), clumps_factor * p));
        best = std::max(best, optimize_x_axis(x, clumps, yb, qy, p));
    }
    return clamp_unit(best / std::log(static_cast<double>(std::min(p, q))));
}

void check_pair(std::span<double const> x, std::span<double const> y, std::size_t min_n)
{
    if (x.size() != y.size()) {
        throw Error(fmt::format("mic: vectors of length {} and {}", x.size(), y.size()));
    }
    if (x.size() < min_n) {
        throw Error(fmt::format("mic: need at least {} samples, got {}", min_n, x.size()));
    }
}

} // namespace

double mutual_information(std::span<double const> joint, std::size_t p, std::size_t q)
{
    if (joint.size() != p * q) {
        throw Error(fmt::format("mutual_information: {} cells for a {}x{} table", joint.size(), p, q));
    }
    std::vector<double> rows(p, 0.0);
    std::vector<double> cols(q, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < q; ++j) {
            double const c = joint[i * q + j];
            if (c < 0.0 || !std::isfinite(c)) {
                throw Error("mutual_information: negative or non-finite count");
            }
            rows[i] += c;
            cols[j] += c;
        }
    }
    // Row and column totals are summed in index order; tables with the same
    // multiset of integer counts give exact totals either way.
    for (double r : rows) {
        total += r;
    }
    if (!(total > 0.0)) {
        throw Error("mutual_information: all-zero table");
    }
    std::vector<double> terms;
    terms.reserve(p * q);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < q; ++j) {
            double const c = joint[i * q + j];
            if (c > 0.0) {
                terms.push_back(c * std::log((c * total) / (rows[i] * cols[j])));
            }
        }
    }
    return std::max(0.0, sorted_sum(terms) / total);
}

double characteristic_value(std::span<double const> x, std::span<double const> y, std::size_t p, std::size_t q,
    bool refine, std::size_t max_clumps_factor)
{
    check_pair(x, y, 4);
    if (p < 2 || q < 2) {
        throw Error(fmt::format("characteristic_value: grid {}x{} below 2x2", p, q));
    }
    RankedAxis const xa(x);
    RankedAxis const ya(y);
    std::size_t qy = 0;
    auto const yb = ya.bins(q, qy);
    return grid_value(xa, yb, qy, p, q, refine, max_clumps_factor);
}

MicScore mic(std::span<double const> x, std::span<double const> y, MicConfig const& cfg)
{
    check_pair(x, y, 10);
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        throw Error(fmt::format("mic: alpha {} not in (0,1)", cfg.alpha));
    }
    double const bound = grid_bound(x.size(), cfg.alpha);
    RankedAxis const xa(x);
    RankedAxis const ya(y);
    MicScore best { 0.0, 2, 2 };
    for (std::size_t q = 2; 2.0 * static_cast<double>(q) <= bound; ++q) {
        std::size_t qy = 0;
        auto const yb = ya.bins(q, qy);
        for (std::size_t p = 2; static_cast<double>(p * q) <= bound; ++p) {
            double v = grid_value(xa, yb, qy, p, q, cfg.refine, cfg.max_clumps_factor);
            if (cfg.refine) {
                // Refine the other axis too; keeps mic(x, y) == mic(y, x).
                std::size_t px = 0;
                auto const xb = xa.bins(p, px);
                v = std::max(v, grid_value(ya, xb, px, q, p, true, cfg.max_clumps_factor));
            }
            if (v > best.value) {
                best = { v, p, q };
            }
        }
    }
    return best;
}

MicScore mic_with_labels(std::span<double const> x, std::span<int const> labels, std::size_t n_classes,
    MicConfig const& cfg)
{
    if (x.size() != labels.size()) {
        throw Error(fmt::format("mic: {} values and {} labels", x.size(), labels.size()));
    }
    if (x.size() < 10) {
        throw Error(fmt::format("mic: need at least 10 samples, got {}", x.size()));
    }
    if (n_classes < 2) {
        return { 0.0, 2, n_classes };
    }
    double const bound = grid_bound(x.size(), cfg.alpha);
    std::vector<std::size_t> yb(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        yb[i] = static_cast<std::size_t>(labels[i]);
    }
    RankedAxis const xa(x);
    std::size_t const q = n_classes;
    std::size_t const p_max = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(bound / static_cast<double>(q))));
    MicScore best { 0.0, 2, q };
    for (std::size_t p = 2; p <= p_max; ++p) {
        double const v = grid_value(xa, yb, q, p, q, cfg.refine, cfg.max_clumps_factor);
        if (v > best.value) {
            best = { v, p, q };
        }
    }
    return best;
}

std::vector<RankedFeature> rank_by_mic(Dataset const& d, MicConfig const& cfg, std::size_t threads)
{
    std::vector<RankedFeature> out(d.n_features());
    parallel_for(d.n_features(), threads, [&](std::size_t c) {
        out[c] = { c, d.column_ids()[c], mic_with_labels(d.column(c), d.labels(), d.n_classes(), cfg) };
    });
    std::stable_sort(out.begin(), out.end(), [](auto const& a, auto const& b) {
        if (a.score.value != b.score.value) {
            return a.score.value > b.score.value;
        }
        return a.column_id < b.column_id;
    });
    return out;
}

} // namespace lmsss
