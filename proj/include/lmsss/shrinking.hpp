#ifndef LMSSS_SHRINKING_HPP
#define LMSSS_SHRINKING_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "lmsss/dataset.hpp"
#include "lmsss/ea.hpp"
#include "lmsss/mic.hpp"

namespace lmsss {

// Which individuals of each lightweight run feed the frequency count.
enum class PoolMode { final_population, pareto_front };

struct ShrinkConfig {
    std::size_t n_mic { 1000 };       // MIC filter size, clamped to D
    std::size_t runs { 5 };           // lightweight runs (R)
    std::size_t generations { 10 };   // generations per lightweight run (t)
    double n_fs_fraction { 0.5 };     // share of the pooled solutions counted
    std::size_t n_nds { 200 };        // shrunk-space size, clamped to n_mic
    PoolMode pool { PoolMode::final_population };
    EAConfig ea {};                   // generations is overridden by `generations`
    MicConfig mic {};
    std::size_t threads { 1 };

    void validate() const;
};

struct MicFilterResult {
    Dataset filtered;                // top-n_mic columns, ascending original index
    std::vector<double> mic_scores;  // aligned with filtered's columns
};

MicFilterResult mic_filter(Dataset const& train, ShrinkConfig const& cfg);

// freq(f) over the top ceil(fraction * |pool|) individuals ordered by
// (loss, f1) ascending, pool order breaking ties.
std::vector<std::size_t> frequency_counts(std::vector<Individual> const& pool, double fraction);

struct FrequencyPassResult {
    std::vector<std::size_t> counts; // per filtered column
    std::size_t pool_size { 0 };
    std::size_t kept { 0 };
    std::size_t evaluations { 0 };  // offspring evaluations, all runs
    std::size_t initial_evaluations { 0 };
    std::size_t classifier_calls { 0 };
};

// R independent EA runs of t generations on the filtered data; run r is seeded
// with hash(ea.seed, r).
FrequencyPassResult frequency_pass(Dataset const& filtered, ShrinkConfig const& cfg);

struct ShrinkResult {
    // Aligned vectors over the chosen features, ascending position/column id.
    std::vector<std::size_t> selected;
    std::vector<double> mic_scores;
    std::vector<double> freq_scores; // frequency / max frequency
    std::vector<std::size_t> nds_rank;

    // Every feature that entered the ranking, in filtered-column order.
    struct Candidate {
        std::size_t column_id { 0 };
        double mic { 0.0 };
        double freq { 0.0 };
        std::size_t nds_rank { 0 };
        bool selected { false };
    };
    std::vector<Candidate> candidates;

    // Lightweight-phase accounting.
    std::size_t runs { 0 };
    std::size_t generations { 0 };
    std::size_t evaluations { 0 };
    std::size_t initial_evaluations { 0 };
    std::size_t classifier_calls { 0 };
};

// Each feature is the point (mic, freq / max freq), ranked by non-dominated
// sorting with both criteria maximised. Layers are taken whole while they fit;
// the layer that overflows is cut by descending crowding distance, ties by
// ascending position. `selected` holds positions into the score vectors.
ShrinkResult nds_feature_ranking(std::span<double const> mic_scores, std::span<std::size_t const> freq_counts,
    std::size_t n_nds);

// MIC filter -> frequency pass -> NDS ranking. `selected` holds original
// column ids (train.column_ids()).
ShrinkResult shrink(Dataset const& train, ShrinkConfig const& cfg);

nlohmann::json to_json(ShrinkResult const& r);
ShrinkResult shrink_result_from_json(nlohmann::json const& j);

} // namespace lmsss

#endif
