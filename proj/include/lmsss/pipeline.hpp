#ifndef LMSSS_PIPELINE_HPP
#define LMSSS_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lmsss/classifier.hpp"
#include "lmsss/dataset.hpp"
#include "lmsss/ea.hpp"
#include "lmsss/feature_mask.hpp"
#include "lmsss/pareto.hpp"
#include "lmsss/shrinking.hpp"

namespace lmsss {

// Ablation ladder; each step adds one component to the previous one.
//   NSGA2       bit-uniform init, uniform crossover, full space
//   INIT_NSGA2  size-uniform init, uniform crossover, full space
//   SS_NSGA2    INIT_NSGA2 on the shrunk space
//   LMSSS       SS_NSGA2 with voting crossover and revival mutation
enum class Variant { nsga2, init_nsga2, ss_nsga2, lmsss };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);
bool uses_shrinking(Variant v);

struct Budget {
    std::size_t pop_size { 200 };
    std::size_t total_generations { 100 };
};

enum class MutationWidth { current, original };

struct PipelineConfig {
    Budget budget {};
    ShrinkConfig shrink {};
    ClassifierConfig classifier {};
    double train_fraction { 0.7 };
    double pr { 0.7 };
    double uniform_rate { 0.5 };
    double revival_window { 0.10 };
    MutationWidth mutation_width { MutationWidth::current };
    std::size_t threads { 1 };

    // Generations left for the main EA after shrinking.
    std::size_t main_generations(Variant v) const;
    void validate(Variant v) const;
};

struct FrontEntry {
    std::vector<std::size_t> features; // original column ids, ascending
    ObjectiveVector objectives;        // f1 against the original width
    double error_rate { 0.0 };

    friend bool operator==(FrontEntry const&, FrontEntry const&) = default;
};

struct BudgetPhase {
    std::string phase;
    std::size_t runs { 0 };
    std::size_t generations { 0 };
    std::size_t pop_size { 0 };
    std::size_t evaluations { 0 };         // offspring evaluations (generations x pop per run)
    std::size_t initial_evaluations { 0 }; // one population per run
    std::size_t classifier_calls { 0 };    // LOOCV actually computed after caching
};

struct RunTiming {
    double wall_seconds { 0.0 };
    double shrink_seconds { 0.0 };
    double main_seconds { 0.0 };
    double main_seconds_per_generation { 0.0 };
};

struct RunReport {
    std::string dataset;
    Variant variant { Variant::lmsss };
    std::uint64_t seed { 0 };
    std::uint64_t partition_hash { 0 };
    std::size_t n_features { 0 };
    std::vector<std::size_t> search_space; // original ids the main EA saw
    std::vector<FrontEntry> train_front;   // loss = training LOOCV loss
    std::vector<FrontEntry> test_front;
    double hv { 0.0 };
    std::optional<double> igd {};          // filled once all variants ran
    double mce { 0.0 };
    std::size_t budget_used { 0 };         // offspring evaluations over all phases
    std::size_t total_evaluations { 0 };   // budget_used plus initial populations
    std::size_t classifier_calls { 0 };
    std::vector<BudgetPhase> ledger;
    std::vector<GenerationStats> history;  // main EA
    RunTiming timing {};
};

// Shrink settings for a run: the lightweight runs always use the LMSSS
// operator set, whatever variant is being evaluated.
ShrinkConfig lightweight_config(PipelineConfig const& cfg, std::size_t original_width, std::uint64_t seed);

// Score each mask on the test split with a model fitted on the train split,
// then keep the non-dominated points. Masks span the original width.
std::vector<FrontEntry> test_front(Dataset const& train, Dataset const& test, std::span<FeatureMask const> masks,
    ClassifierConfig const& cfg);

// Seed layout: the split uses `seed` as is, shrinking uses hash(seed,
// "shrink") so both shrinking variants see the same shrunk space, and the
// main EA uses hash(seed, variant).
RunReport run_variant(Variant v, Dataset const& data, PipelineConfig const& cfg, std::uint64_t seed,
    std::string dataset_name = "dataset");

nlohmann::json to_json(RunReport const& r, bool include_timing = true);
RunReport run_report_from_json(nlohmann::json const& j);

} // namespace lmsss

#endif
