#include "lmsss/shrinking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "lmsss/error.hpp"
#include "lmsss/parallel.hpp"
#include "lmsss/pareto.hpp"

namespace lmsss {

void ShrinkConfig::validate() const
{
    if (n_mic == 0 || n_nds == 0) {
        throw Error("shrink: n_mic and n_nds must be positive");
    }
    if (!(n_fs_fraction > 0.0 && n_fs_fraction <= 1.0)) {
        throw Error(fmt::format("shrink: n_fs fraction {} not in (0,1]", n_fs_fraction));
    }
    if (runs < 1 || generations < 1) {
        throw Error("shrink: need at least one lightweight run of at least one generation");
    }
}

MicFilterResult mic_filter(Dataset const& train, ShrinkConfig const& cfg)
{
    auto const ranking = rank_by_mic(train, cfg.mic, cfg.threads);
    std::size_t const keep = std::min(cfg.n_mic, ranking.size());
    std::vector<RankedFeature> top(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(top.begin(), top.end(), [](auto const& a, auto const& b) { return a.column < b.column; });
    std::vector<std::size_t> columns;
    std::vector<double> scores;
    for (auto const& f : top) {
        columns.push_back(f.column);
        scores.push_back(f.score.value);
    }
    return { project_columns(train, columns), std::move(scores) };
}

std::vector<std::size_t> frequency_counts(std::vector<Individual> const& pool, double fraction)
{
    if (pool.empty()) {
        return {};
    }
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        auto const& x = pool[a].fitness();
        auto const& y = pool[b].fitness();
        return x.loss != y.loss ? x.loss < y.loss : x.f1 < y.f1;
    });
    auto const kept = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pool.size()))), 1, pool.size());
    std::vector<std::size_t> counts(pool.front().mask.width(), 0);
    for (std::size_t k = 0; k < kept; ++k) {
        for (auto f : pool[order[k]].mask.indices()) {
            ++counts[f];
        }
    }
    return counts;
}

FrequencyPassResult frequency_pass(Dataset const& filtered, ShrinkConfig const& cfg)
{
    cfg.validate();
    if (filtered.n_features() == 0) {
        throw Error("frequency_pass: no features");
    }
    std::vector<EAResult> results(cfg.runs);
    parallel_for(cfg.runs, cfg.threads, [&](std::size_t r) {
        EAConfig ea = cfg.ea;
        ea.generations = cfg.generations;
        ea.seed = hash_combine(cfg.ea.seed, r);
        results[r] = run_ea(filtered, ea);
    });
    FrequencyPassResult out;
    std::vector<Individual> pool;
    for (auto& r : results) {
        auto& source = cfg.pool == PoolMode::final_population ? r.population : r.front;
        pool.insert(pool.end(), source.begin(), source.end());
        out.initial_evaluations += cfg.ea.pop_size;
        out.evaluations += r.evaluations - cfg.ea.pop_size;
        out.classifier_calls += r.classifier_calls;
    }
    out.pool_size = pool.size();
    out.kept = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(cfg.n_fs_fraction * static_cast<double>(pool.size()))), 1, pool.size());
    out.counts = frequency_counts(pool, cfg.n_fs_fraction);
    return out;
}

ShrinkResult nds_feature_ranking(std::span<double const> mic_scores, std::span<std::size_t const> freq_counts,
    std::size_t n_nds)
{
    if (mic_scores.size() != freq_counts.size()) {
        throw Error(fmt::format("nds_feature_ranking: {} MIC scores vs {} frequencies", mic_scores.size(), freq_counts.size()));
    }
    std::size_t const n = mic_scores.size();
    std::size_t const max_freq = n > 0 ? *std::max_element(freq_counts.begin(), freq_counts.end()) : 0;
    std::vector<double> freq(n, 0.0);
    std::vector<ObjectiveVector> points(n);
    for (std::size_t i = 0; i < n; ++i) {
        freq[i] = max_freq > 0 ? static_cast<double>(freq_counts[i]) / static_cast<double>(max_freq) : 0.0;
        points[i] = { -mic_scores[i], -freq[i] }; // maximise both
    }
    auto const fronts = non_dominated_sort(points);

    ShrinkResult out;
    out.candidates.resize(n);
    std::vector<std::size_t> rank(n, 0);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        for (auto i : fronts[r]) {
            rank[i] = r;
        }
    }
    std::vector<std::size_t> chosen;
    std::size_t const want = std::min(n_nds, n);
    for (auto const& front : fronts) {
        if (chosen.size() == want) {
            break;
        }
        if (chosen.size() + front.size() <= want) {
            chosen.insert(chosen.end(), front.begin(), front.end());
            continue;
        }
        std::vector<ObjectiveVector> sub;
        for (auto i : front) {
            sub.push_back(points[i]);
        }
        auto const crowd = crowding_distance(sub);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        // front is ascending, so a stable sort breaks ties by ascending position.
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return crowd[a] > crowd[b]; });
        for (std::size_t k = 0; chosen.size() < want; ++k) {
            chosen.push_back(front[order[k]]);
        }
    }
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t i = 0; i < n; ++i) {
        out.candidates[i] = { i, mic_scores[i], freq[i], rank[i], false };
    }
    for (auto i : chosen) {
        out.selected.push_back(i);
        out.mic_scores.push_back(mic_scores[i]);
        out.freq_scores.push_back(freq[i]);
        out.nds_rank.push_back(rank[i]);
        out.candidates[i].selected = true;
    }
    return out;
}

ShrinkResult shrink(Dataset const& train, ShrinkConfig const& cfg)
{
    cfg.validate();
    auto const filtered = mic_filter(train, cfg);
    auto const freq = frequency_pass(filtered.filtered, cfg);
    auto result = nds_feature_ranking(filtered.mic_scores, freq.counts, cfg.n_nds);
    auto const ids = filtered.filtered.column_ids();
    for (auto& s : result.selected) {
        s = ids[s];
    }
    for (auto& c : result.candidates) {
        c.column_id = ids[c.column_id];
    }
    result.runs = cfg.runs;
    result.generations = cfg.generations;
    result.evaluations = freq.evaluations;
    result.initial_evaluations = freq.initial_evaluations;
    result.classifier_calls = freq.classifier_calls;
    return result;
}

nlohmann::json to_json(ShrinkResult const& r)
{
    nlohmann::json candidates = nlohmann::json::array();
    for (auto const& c : r.candidates) {
        candidates.push_back({ { "column_id", c.column_id }, { "mic", c.mic }, { "freq", c.freq },
            { "nds_rank", c.nds_rank }, { "selected", c.selected } });
    }
    return {
        { "selected", r.selected },
        { "mic_scores", r.mic_scores },
        { "freq_scores", r.freq_scores },
        { "nds_rank", r.nds_rank },
        { "candidates", candidates },
        { "lightweight", { { "runs", r.runs }, { "generations", r.generations }, { "evaluations", r.evaluations },
                             { "initial_evaluations", r.initial_evaluations }, { "classifier_calls", r.classifier_calls } } },
    };
}

ShrinkResult shrink_result_from_json(nlohmann::json const& j)
{
    ShrinkResult r;
    j.at("selected").get_to(r.selected);
    j.at("mic_scores").get_to(r.mic_scores);
    j.at("freq_scores").get_to(r.freq_scores);
    j.at("nds_rank").get_to(r.nds_rank);
    if (r.mic_scores.size() != r.selected.size() || r.freq_scores.size() != r.selected.size()
        || r.nds_rank.size() != r.selected.size()) {
        throw Error("shrink result: score vectors not aligned with selection");
    }
    if (j.contains("candidates")) {
        for (auto const& c : j.at("candidates")) {
            r.candidates.push_back({ c.at("column_id").get<std::size_t>(), c.at("mic").get<double>(),
                c.at("freq").get<double>(), c.at("nds_rank").get<std::size_t>(), c.at("selected").get<bool>() });
        }
    }
    if (j.contains("lightweight")) {
        auto const& l = j.at("lightweight");
        r.runs = l.at("runs");
        r.generations = l.at("generations");
        r.evaluations = l.at("evaluations");
        r.initial_evaluations = l.at("initial_evaluations");
        r.classifier_calls = l.at("classifier_calls");
    }
    return r;
}

} // namespace lmsss
