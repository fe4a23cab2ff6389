#ifndef LMSSS_EA_HPP
#define LMSSS_EA_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lmsss/classifier.hpp"
#include "lmsss/dataset.hpp"
#include "lmsss/feature_mask.hpp"
#include "lmsss/pareto.hpp"
#include "lmsss/rng.hpp"

namespace lmsss {

enum class InitMode { size_uniform, bit_uniform };
enum class CrossoverKind { voting, uniform };

struct EAConfig {
    std::size_t pop_size { 200 };
    std::size_t generations { 100 };
    CrossoverKind crossover { CrossoverKind::voting };
    double pr { 0.7 };           // voting: chance a disagreement bit follows the better parent
    double uniform_rate { 0.5 }; // uniform: per-pair crossover probability
    // Per-bit flip probability; unset means 1 / (search-space width).
    std::optional<double> mutation_rate {};
    // Fraction of generations, counted from the start, with revival mutation.
    // 0 disables it.
    double revival_window { 0.10 };
    InitMode init { InitMode::size_uniform };
    ClassifierConfig classifier {};
    std::uint64_t seed { 0 };
    std::size_t threads { 1 }; // offspring evaluation workers

    void validate() const;
    double mutation_rate_for(std::size_t width) const;
};

struct Individual {
    FeatureMask mask;
    std::optional<ObjectiveVector> objectives {};
    std::uint64_t eval_id { 0 };

    ObjectiveVector const& fitness() const;
};

// Sets one uniformly chosen bit when the mask is empty.
void repair(FeatureMask& mask, Rng& rng);

std::vector<Individual> init_population(std::size_t width, EAConfig const& cfg, Rng& rng);

// The lower-loss parent (ties: lower f1, then argument order) leads. Bits the
// parents agree on are copied; each disagreement bit takes the leader's value
// with probability pr.
FeatureMask voting_crossover(Individual const& p1, Individual const& p2, double pr, Rng& rng);

// With probability `rate` the pair exchanges each differing bit with
// probability 1/2; otherwise both children are copies.
std::pair<FeatureMask, FeatureMask> uniform_crossover(FeatureMask const& a, FeatureMask const& b, double rate, Rng& rng);

FeatureMask flip_mutation(FeatureMask mask, double rate, Rng& rng);

bool revival_active(std::size_t generation, EAConfig const& cfg);

// Inside the early window, every feature absent from the whole population is
// switched on in one uniformly chosen individual, whose objectives are dropped.
std::vector<Individual> revival_mutation(std::vector<Individual> pop, std::size_t generation, EAConfig const& cfg,
    Rng& rng);

// Smallest column popcount over the population.
std::size_t min_feature_coverage(std::vector<Individual> const& pop);

// f1 = popcount / width, loss from LOOCV on the training set.
ObjectiveVector evaluate(Individual& ind, Dataset const& train, EAConfig const& cfg);

// Memoises LOOCV per mask for one run and stamps eval ids.
class Evaluator {
public:
    Evaluator(Dataset const& train, EAConfig const& cfg) : train_(train), cfg_(cfg) { }

    void evaluate(std::vector<Individual>& batch);

    std::size_t evaluations() const noexcept { return evaluations_; }
    std::size_t classifier_calls() const noexcept { return classifier_calls_; }

private:
    Dataset const& train_;
    EAConfig const& cfg_;
    std::unordered_map<FeatureMask, ObjectiveVector, FeatureMaskHash> cache_;
    std::uint64_t next_id_ { 1 };
    std::size_t evaluations_ { 0 };
    std::size_t classifier_calls_ { 0 };
};

// Fill by non-dominated rank; the split rank is cut by descending crowding
// distance, ties kept in pool order.
std::vector<Individual> environmental_selection(std::vector<Individual> pool, std::size_t pop_size);

struct GenerationStats {
    std::size_t generation { 0 };
    double best_loss { 0.0 };
    double front_hv { 0.0 };
    // Min column popcount of the offspring after revival; 0 outside the window
    // or when revival is off.
    std::size_t offspring_coverage { 0 };
};

struct EAResult {
    std::vector<Individual> population;
    std::vector<Individual> front; // rank 0, one entry per distinct mask
    std::vector<GenerationStats> history;
    std::size_t evaluations { 0 };
    std::size_t classifier_calls { 0 };
};

EAResult run_ea(Dataset const& train, EAConfig const& cfg);

} // namespace lmsss

#endif
