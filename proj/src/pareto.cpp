#include "lmsss/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lmsss/error.hpp"

namespace lmsss {

std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<ObjectiveVector const> points)
{
    std::size_t const n = points.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(points[i], points[j])) {
                dominated[i].push_back(j);
                ++count[j];
            } else if (dominates(points[j], points[i])) {
                dominated[j].push_back(i);
                ++count[i];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (count[i] == 0) {
            current.push_back(i);
        }
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto i : current) {
            for (auto j : dominated[i]) {
                if (--count[j] == 0) {
                    next.push_back(j);
                }
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<std::size_t> non_dominated_indices(std::span<ObjectiveVector const> points)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool keep = true;
        for (std::size_t j = 0; j < points.size() && keep; ++j) {
            keep = !dominates(points[j], points[i]);
        }
        if (keep) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<double> crowding_distance(std::span<ObjectiveVector const> front)
{
    std::size_t const n = front.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    std::vector<std::size_t> order(n);
    auto accumulate = [&](auto key) {
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return key(front[a]) < key(front[b]); });
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        double const range = key(front[order.back()]) - key(front[order.front()]);
        if (range <= 0.0) {
            return;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            dist[order[i]] += (key(front[order[i + 1]]) - key(front[order[i - 1]])) / range;
        }
    };
    accumulate([](ObjectiveVector const& v) { return v.f1; });
    accumulate([](ObjectiveVector const& v) { return v.loss; });
    return dist;
}

double hypervolume_2d(std::span<ObjectiveVector const> front, ObjectiveVector ref)
{
    std::vector<ObjectiveVector> pts;
    pts.reserve(front.size());
    for (auto const& p : front) {
        if (p.f1 < ref.f1 && p.loss < ref.loss) {
            pts.push_back(p);
        }
    }
    std::sort(pts.begin(), pts.end(), [](auto const& a, auto const& b) {
        return a.f1 != b.f1 ? a.f1 < b.f1 : a.loss < b.loss;
    });
    // Sweep along f1; each point adds the strip between it and the next
    // improvement in loss.
    double volume = 0.0;
    double ceiling = ref.loss;
    for (auto const& p : pts) {
        if (p.loss < ceiling) {
            volume += (ref.f1 - p.f1) * (ceiling - p.loss);
            ceiling = p.loss;
        }
    }
    return volume;
}

double igd(std::span<ObjectiveVector const> front, std::span<ObjectiveVector const> reference, EmptyFrontPolicy policy)
{
    if (reference.empty()) {
        throw Error("igd: empty reference front");
    }
    if (front.empty()) {
        if (policy == EmptyFrontPolicy::infinity) {
            return std::numeric_limits<double>::infinity();
        }
        throw Error("igd: empty front");
    }
    double total = 0.0;
    for (auto const& r : reference) {
        double best = std::numeric_limits<double>::infinity();
        for (auto const& p : front) {
            best = std::min(best, std::hypot(p.f1 - r.f1, p.loss - r.loss));
        }
        total += best;
    }
    return total / static_cast<double>(reference.size());
}

std::vector<ObjectiveVector> merge_reference_front(std::span<std::vector<ObjectiveVector> const> fronts)
{
    std::vector<ObjectiveVector> all;
    for (auto const& f : fronts) {
        all.insert(all.end(), f.begin(), f.end());
    }
    if (all.empty()) {
        throw Error("merge_reference_front: all inputs empty");
    }
    auto const less = [](auto const& a, auto const& b) { return a.f1 != b.f1 ? a.f1 < b.f1 : a.loss < b.loss; };
    std::sort(all.begin(), all.end(), less);
    all.erase(std::unique(all.begin(), all.end()), all.end());
    // Sorted by f1 then loss: a point survives iff its loss beats every earlier one.
    std::vector<ObjectiveVector> out;
    double best_loss = std::numeric_limits<double>::infinity();
    for (auto const& p : all) {
        if (p.loss < best_loss) {
            out.push_back(p);
            best_loss = p.loss;
        }
    }
    return out;
}

} // namespace lmsss
