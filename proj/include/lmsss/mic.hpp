#ifndef LMSSS_MIC_HPP
#define LMSSS_MIC_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "lmsss/dataset.hpp"

namespace lmsss {

struct MicConfig {
    double alpha { 0.6 };              // grid bound B(n) = n^alpha
    std::size_t max_clumps_factor { 5 }; // x-axis candidate edges per target bin
    // Optimise the x-axis edges over max_clumps_factor * p equal-frequency
    // clumps. Off leaves the pure equal-frequency (rank-based) grid family.
    bool refine { true };
};

struct MicScore {
    double value { 0.0 };
    std::size_t p { 0 }; // x bins of the maximising grid
    std::size_t q { 0 }; // y bins (or classes)
};

// max(4, n^alpha).
double grid_bound(std::size_t n, double alpha);

// Mutual information in nats of a p x q table of counts (row-major), with
// 0 log 0 = 0. The cell terms are summed in sorted order, so a table and its
// transpose give the same double.
double mutual_information(std::span<double const> joint, std::size_t p, std::size_t q);

// Best normalised MI over the searched p x q partitions of (x, y), divided by
// log min(p, q). Result in [0, 1].
double characteristic_value(std::span<double const> x, std::span<double const> y, std::size_t p, std::size_t q,
    bool refine = true, std::size_t max_clumps_factor = 5);

// Max over 2 <= p, 2 <= q, p*q <= B(n) of the grid value. With refinement on,
// each grid is refined along x with y fixed and along y with x fixed, and the
// larger value kept, so the score is symmetric in (x, y). n >= 10.
MicScore mic(std::span<double const> x, std::span<double const> y, MicConfig const& cfg = {});

// y is categorical: q is pinned to the number of classes and only x is
// partitioned, p from 2 up to max(2, B(n)/q).
MicScore mic_with_labels(std::span<double const> x, std::span<int const> labels, std::size_t n_classes,
    MicConfig const& cfg = {});

struct RankedFeature {
    std::size_t column { 0 };    // position in the scored dataset
    std::size_t column_id { 0 }; // original index
    MicScore score;
};

// Descending by MIC against the class label, ties by ascending column id.
std::vector<RankedFeature> rank_by_mic(Dataset const& d, MicConfig const& cfg = {}, std::size_t threads = 1);

} // namespace lmsss

#endif
