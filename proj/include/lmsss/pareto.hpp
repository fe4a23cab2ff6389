#ifndef LMSSS_PARETO_HPP
#define LMSSS_PARETO_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace lmsss {

// (selected-feature ratio, classification loss); both minimised.
struct ObjectiveVector {
    double f1 { 0.0 };
    double loss { 0.0 };

    friend bool operator==(ObjectiveVector const&, ObjectiveVector const&) = default;
};

inline bool dominates(ObjectiveVector const& a, ObjectiveVector const& b) noexcept
{
    return a.f1 <= b.f1 && a.loss <= b.loss && (a.f1 < b.f1 || a.loss < b.loss);
}

// Successive non-dominated layers; each layer lists point indices ascending.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<ObjectiveVector const> points);

// Indices of the rank-0 layer.
std::vector<std::size_t> non_dominated_indices(std::span<ObjectiveVector const> points);

// NSGA-II crowding distance. The first and last point of each objective's
// ordering (stable, ties by position) get +inf; zero-range objectives add 0.
std::vector<double> crowding_distance(std::span<ObjectiveVector const> front);

// Area dominated by the points and bounded by ref; points that do not
// dominate ref add nothing.
double hypervolume_2d(std::span<ObjectiveVector const> front, ObjectiveVector ref = { 1.0, 1.0 });

enum class EmptyFrontPolicy { error, infinity };

// Mean distance from each reference point to its nearest front point.
double igd(std::span<ObjectiveVector const> front, std::span<ObjectiveVector const> reference,
    EmptyFrontPolicy policy = EmptyFrontPolicy::error);

// Non-dominated subset of the union, exact-duplicate free, sorted by (f1, loss).
std::vector<ObjectiveVector> merge_reference_front(std::span<std::vector<ObjectiveVector> const> fronts);

} // namespace lmsss

#endif
