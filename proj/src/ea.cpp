#include "lmsss/ea.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "lmsss/error.hpp"
#include "lmsss/parallel.hpp"

namespace lmsss {

void EAConfig::validate() const
{
    if (pop_size < 4 || pop_size % 2 != 0) {
        throw Error(fmt::format("population size {} must be even and at least 4", pop_size));
    }
    if (crossover == CrossoverKind::voting && !(pr > 0.5 && pr <= 1.0)) {
        throw Error(fmt::format("voting crossover needs 0.5 < pr <= 1, got {}", pr));
    }
    if (crossover == CrossoverKind::uniform && !(uniform_rate >= 0.0 && uniform_rate <= 1.0)) {
        throw Error(fmt::format("uniform crossover rate {} not in [0,1]", uniform_rate));
    }
    if (mutation_rate && !(*mutation_rate > 0.0 && *mutation_rate <= 1.0)) {
        throw Error(fmt::format("mutation rate {} not in (0,1]", *mutation_rate));
    }
    if (!(revival_window >= 0.0 && revival_window <= 1.0)) {
        throw Error(fmt::format("revival window {} not in [0,1]", revival_window));
    }
    if (classifier.k < 1) {
        throw Error("k must be at least 1");
    }
}

double EAConfig::mutation_rate_for(std::size_t width) const
{
    return mutation_rate.value_or(1.0 / static_cast<double>(std::max<std::size_t>(width, 1)));
}

ObjectiveVector const& Individual::fitness() const
{
    if (!objectives) {
        throw Error("individual has not been evaluated");
    }
    return *objectives;
}

void repair(FeatureMask& mask, Rng& rng)
{
    if (mask.empty() && mask.width() > 0) {
        mask.set(rng.below(mask.width()));
    }
}

std::vector<Individual> init_population(std::size_t width, EAConfig const& cfg, Rng& rng)
{
    if (width == 0) {
        throw Error("init_population: zero-width search space");
    }
    std::vector<Individual> pop;
    pop.reserve(cfg.pop_size);
    std::vector<std::size_t> perm(width);
    for (std::size_t i = 0; i < cfg.pop_size; ++i) {
        FeatureMask mask(width);
        if (cfg.init == InitMode::size_uniform) {
            auto const size = 1 + rng.below(width);
            // Partial Fisher-Yates: the first `size` slots are a uniform subset.
            std::iota(perm.begin(), perm.end(), std::size_t { 0 });
            for (std::size_t k = 0; k < size; ++k) {
                auto const j = k + rng.below(width - k);
                std::swap(perm[k], perm[j]);
                mask.set(perm[k]);
            }
        } else {
            for (std::size_t b = 0; b < width; ++b) {
                if (rng.bernoulli(0.5)) {
                    mask.set(b);
                }
            }
            repair(mask, rng);
        }
        pop.push_back(Individual { std::move(mask) });
    }
    return pop;
}

FeatureMask voting_crossover(Individual const& p1, Individual const& p2, double pr, Rng& rng)
{
    if (p1.mask.width() != p2.mask.width()) {
        throw Error(fmt::format("voting_crossover: widths {} and {}", p1.mask.width(), p2.mask.width()));
    }
    auto const& a = p1.fitness();
    auto const& b = p2.fitness();
    bool const swap = b.loss < a.loss || (b.loss == a.loss && b.f1 < a.f1);
    auto const& better = swap ? p2.mask : p1.mask;
    auto const& worse = swap ? p1.mask : p2.mask;

    FeatureMask child = better;
    for (std::size_t i = 0; i < child.width(); ++i) {
        if (better.test(i) != worse.test(i) && !rng.bernoulli(pr)) {
            child.flip(i);
        }
    }
    return child;
}

std::pair<FeatureMask, FeatureMask> uniform_crossover(FeatureMask const& a, FeatureMask const& b, double rate, Rng& rng)
{
    if (a.width() != b.width()) {
        throw Error(fmt::format("uniform_crossover: widths {} and {}", a.width(), b.width()));
    }
    FeatureMask x = a;
    FeatureMask y = b;
    if (rng.bernoulli(rate)) {
        for (std::size_t i = 0; i < a.width(); ++i) {
            if (a.test(i) != b.test(i) && rng.bernoulli(0.5)) {
                x.flip(i);
                y.flip(i);
            }
        }
    }
    return { std::move(x), std::move(y) };
}

FeatureMask flip_mutation(FeatureMask mask, double rate, Rng& rng)
{
    for (std::size_t i = 0; i < mask.width(); ++i) {
        if (rng.bernoulli(rate)) {
            mask.flip(i);
        }
    }
    repair(mask, rng);
    return mask;
}

bool revival_active(std::size_t generation, EAConfig const& cfg)
{
    return static_cast<double>(generation) < cfg.revival_window * static_cast<double>(cfg.generations);
}

std::vector<Individual> revival_mutation(std::vector<Individual> pop, std::size_t generation, EAConfig const& cfg,
    Rng& rng)
{
    if (pop.empty() || !revival_active(generation, cfg)) {
        return pop;
    }
    std::size_t const width = pop.front().mask.width();
    std::vector<bool> present(width, false);
    for (auto const& ind : pop) {
        for (auto i : ind.mask.indices()) {
            present[i] = true;
        }
    }
    for (std::size_t f = 0; f < width; ++f) {
        if (!present[f]) {
            auto& target = pop[rng.below(pop.size())];
            target.mask.set(f);
            target.objectives.reset();
        }
    }
    return pop;
}

std::size_t min_feature_coverage(std::vector<Individual> const& pop)
{
    if (pop.empty()) {
        return 0;
    }
    std::vector<std::size_t> count(pop.front().mask.width(), 0);
    for (auto const& ind : pop) {
        for (auto i : ind.mask.indices()) {
            ++count[i];
        }
    }
    return count.empty() ? 0 : *std::min_element(count.begin(), count.end());
}

namespace {

ObjectiveVector score(FeatureMask const& mask, Dataset const& train, ClassifierConfig const& classifier)
{
    if (mask.width() != train.n_features()) {
        throw Error(fmt::format("evaluate: mask width {} vs {} features", mask.width(), train.n_features()));
    }
    if (mask.empty()) {
        throw Error("evaluate: empty mask");
    }
    auto const r = loocv_eval(train, mask, classifier);
    return { static_cast<double>(mask.count()) / static_cast<double>(mask.width()), r.loss };
}

} // namespace

ObjectiveVector evaluate(Individual& ind, Dataset const& train, EAConfig const& cfg)
{
    ind.objectives = score(ind.mask, train, cfg.classifier);
    return *ind.objectives;
}

void Evaluator::evaluate(std::vector<Individual>& batch)
{
    // Distinct uncached masks, in batch order.
    std::vector<std::size_t> todo;
    std::unordered_map<FeatureMask, std::size_t, FeatureMaskHash> first_seen;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch[i].objectives) {
            continue;
        }
        if (!cache_.contains(batch[i].mask) && first_seen.emplace(batch[i].mask, i).second) {
            todo.push_back(i);
        }
    }
    std::vector<ObjectiveVector> fresh(todo.size());
    parallel_for(todo.size(), cfg_.threads, [&](std::size_t t) {
        fresh[t] = score(batch[todo[t]].mask, train_, cfg_.classifier);
    });
    for (std::size_t t = 0; t < todo.size(); ++t) {
        cache_.emplace(batch[todo[t]].mask, fresh[t]);
    }
    classifier_calls_ += todo.size();
    for (auto& ind : batch) {
        if (ind.objectives) {
            continue;
        }
        ind.objectives = cache_.at(ind.mask);
        ind.eval_id = next_id_++;
        ++evaluations_;
    }
}

std::vector<Individual> environmental_selection(std::vector<Individual> pool, std::size_t pop_size)
{
    if (pool.size() < pop_size) {
        throw Error(fmt::format("environmental_selection: pool of {} below population size {}", pool.size(), pop_size));
    }
    std::vector<ObjectiveVector> points;
    points.reserve(pool.size());
    for (auto const& ind : pool) {
        points.push_back(ind.fitness());
    }
    auto const fronts = non_dominated_sort(points);
    std::vector<Individual> survivors;
    survivors.reserve(pop_size);
    for (auto const& front : fronts) {
        if (survivors.size() + front.size() <= pop_size) {
            for (auto i : front) {
                survivors.push_back(std::move(pool[i]));
            }
            if (survivors.size() == pop_size) {
                break;
            }
            continue;
        }
        std::vector<ObjectiveVector> sub;
        sub.reserve(front.size());
        for (auto i : front) {
            sub.push_back(points[i]);
        }
        auto const crowd = crowding_distance(sub);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return crowd[a] > crowd[b]; });
        for (std::size_t k = 0; survivors.size() < pop_size; ++k) {
            survivors.push_back(std::move(pool[front[order[k]]]));
        }
        break;
    }
    return survivors;
}

namespace {

struct Standing {
    std::vector<std::size_t> rank;
    std::vector<double> crowding;
};

Standing standing_of(std::vector<Individual> const& pop)
{
    std::vector<ObjectiveVector> points;
    points.reserve(pop.size());
    for (auto const& ind : pop) {
        points.push_back(ind.fitness());
    }
    Standing s { std::vector<std::size_t>(pop.size()), std::vector<double>(pop.size()) };
    auto const fronts = non_dominated_sort(points);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        std::vector<ObjectiveVector> sub;
        for (auto i : fronts[r]) {
            sub.push_back(points[i]);
        }
        auto const crowd = crowding_distance(sub);
        for (std::size_t k = 0; k < fronts[r].size(); ++k) {
            s.rank[fronts[r][k]] = r;
            s.crowding[fronts[r][k]] = crowd[k];
        }
    }
    return s;
}

std::size_t tournament(Standing const& s, Rng& rng)
{
    auto const a = rng.below(s.rank.size());
    auto const b = rng.below(s.rank.size());
    if (s.rank[b] < s.rank[a] || (s.rank[b] == s.rank[a] && s.crowding[b] > s.crowding[a])) {
        return b;
    }
    return a;
}

GenerationStats stats_of(std::vector<Individual> const& pop, std::size_t generation, std::size_t coverage)
{
    std::vector<ObjectiveVector> points;
    for (auto const& ind : pop) {
        points.push_back(ind.fitness());
    }
    std::vector<ObjectiveVector> front;
    for (auto i : non_dominated_indices(points)) {
        front.push_back(points[i]);
    }
    double best = points.front().loss;
    for (auto const& p : points) {
        best = std::min(best, p.loss);
    }
    return { generation, best, hypervolume_2d(front), coverage };
}

} // namespace

EAResult run_ea(Dataset const& train, EAConfig const& cfg)
{
    cfg.validate();
    std::size_t const width = train.n_features();
    Rng rng(cfg.seed);
    Evaluator evaluator(train, cfg);
    double const rate = cfg.mutation_rate_for(width);

    EAResult result;
    auto pop = init_population(width, cfg, rng);
    evaluator.evaluate(pop);
    result.history.push_back(stats_of(pop, 0, 0));

    for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
        auto const standing = standing_of(pop);
        std::vector<Individual> offspring;
        offspring.reserve(cfg.pop_size);
        while (offspring.size() < cfg.pop_size) {
            auto const& a = pop[tournament(standing, rng)];
            auto const& b = pop[tournament(standing, rng)];
            FeatureMask c1;
            FeatureMask c2;
            if (cfg.crossover == CrossoverKind::voting) {
                c1 = voting_crossover(a, b, cfg.pr, rng);
                c2 = voting_crossover(a, b, cfg.pr, rng);
            } else {
                std::tie(c1, c2) = uniform_crossover(a.mask, b.mask, cfg.uniform_rate, rng);
            }
            offspring.push_back(Individual { flip_mutation(std::move(c1), rate, rng) });
            offspring.push_back(Individual { flip_mutation(std::move(c2), rate, rng) });
        }
        std::size_t coverage = 0;
        if (revival_active(gen, cfg)) {
            offspring = revival_mutation(std::move(offspring), gen, cfg, rng);
            coverage = min_feature_coverage(offspring);
        }
        evaluator.evaluate(offspring);

        std::vector<Individual> pool = std::move(pop);
        pool.insert(pool.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
        pop = environmental_selection(std::move(pool), cfg.pop_size);
        result.history.push_back(stats_of(pop, gen + 1, coverage));
    }

    std::vector<ObjectiveVector> points;
    for (auto const& ind : pop) {
        points.push_back(ind.fitness());
    }
    std::unordered_map<FeatureMask, bool, FeatureMaskHash> seen;
    for (auto i : non_dominated_indices(points)) {
        if (seen.emplace(pop[i].mask, true).second) {
            result.front.push_back(pop[i]);
        }
    }
    result.population = std::move(pop);
    result.evaluations = evaluator.evaluations();
    result.classifier_calls = evaluator.classifier_calls();
    return result;
}

} // namespace lmsss
