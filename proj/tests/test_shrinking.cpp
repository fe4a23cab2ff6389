#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "lmsss/error.hpp"
#include "lmsss/shrinking.hpp"
#include "oracles.hpp"

using namespace lmsss;

namespace {

Individual ind(std::size_t width, std::vector<std::size_t> bits, double loss, double f1)
{
    return { FeatureMask::from_indices(width, bits), ObjectiveVector { f1, loss } };
}

ShrinkConfig small_config()
{
    ShrinkConfig c;
    c.n_mic = 60;
    c.n_nds = 20;
    c.runs = 2;
    c.generations = 3;
    c.ea.pop_size = 20;
    c.ea.seed = 11;
    return c;
}

} // namespace

TEST_CASE("ShrinkConfig validation")
{
    ShrinkConfig c;
    CHECK_NOTHROW(c.validate());
    c.n_fs_fraction = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.runs = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.n_nds = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("mic_filter keeps a label copy and clamps to D")
{
    auto syn = generate_synthetic(80, 30, 3, 4);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels(syn.data.labels().begin(), syn.data.labels().end());
    for (std::size_t r = 0; r < syn.data.n_instances(); ++r) {
        std::vector<double> row;
        for (std::size_t c = 0; c < 30; ++c) row.push_back(syn.data.at(r, c));
        row.push_back(double(labels[r]));
        rows.push_back(row);
    }
    auto d = testutil::make(rows, labels);
    ShrinkConfig c;
    c.n_mic = 1000;
    auto all = mic_filter(d, c);
    CHECK(all.filtered.n_features() == 31);
    CHECK(all.mic_scores.size() == 31);
    CHECK(all.mic_scores.back() >= 0.99);

    c.n_mic = 5;
    auto top = mic_filter(d, c);
    auto ids = top.filtered.column_ids();
    CHECK(ids.size() == 5);
    CHECK(std::is_sorted(ids.begin(), ids.end()));
    CHECK(std::find(ids.begin(), ids.end(), 30) != ids.end());
    double lowest_kept = *std::min_element(top.mic_scores.begin(), top.mic_scores.end());
    std::size_t above = 0;
    for (double s : all.mic_scores) above += s > lowest_kept;
    CHECK(above < 5);
}

TEST_CASE("frequency_counts")
{
    std::vector<Individual> pool { ind(4, { 0, 1 }, 0.3, 0.5), ind(4, { 1, 2 }, 0.1, 0.5), ind(4, { 2, 3 }, 0.2, 0.5),
        ind(4, { 0 }, 0.2, 0.25) };
    // Order: (0.1,.5) (0.2,.25) (0.2,.5) (0.3,.5); ceil(0.5 * 4) = 2 kept.
    CHECK(frequency_counts(pool, 0.5) == std::vector<std::size_t> { 1, 1, 1, 0 });
    CHECK(frequency_counts(pool, 1.0) == std::vector<std::size_t> { 2, 2, 2, 1 });
    CHECK(frequency_counts(pool, 1e-9) == std::vector<std::size_t> { 0, 1, 1, 0 });
    CHECK(frequency_counts({}, 0.5).empty());
}

TEST_CASE("nds_feature_ranking trade-off")
{
    // A: strong MIC, rarely chosen. B: weak MIC, often chosen. C: beaten by both.
    std::vector<double> mic { 0.9, 0.3, 0.2 };
    std::vector<std::size_t> freq { 2, 10, 1 };
    auto r = nds_feature_ranking(mic, freq, 2);
    CHECK(r.selected == std::vector<std::size_t> { 0, 1 });
    CHECK(r.nds_rank == std::vector<std::size_t> { 0, 0 });
    CHECK(r.freq_scores == std::vector<double> { 0.2, 1.0 });
    REQUIRE(r.candidates.size() == 3);
    CHECK(r.candidates[2].nds_rank == 1);
    CHECK_FALSE(r.candidates[2].selected);

    auto clamp = nds_feature_ranking(mic, freq, 50);
    CHECK(clamp.selected.size() == 3);

    std::vector<std::size_t> zeros { 0, 0, 0 };
    auto z = nds_feature_ranking(mic, zeros, 1);
    CHECK(z.selected == std::vector<std::size_t> { 0 });

    std::vector<std::size_t> shorter { 1 };
    CHECK_THROWS_AS(nds_feature_ranking(mic, shorter, 1), Error);
}

TEST_CASE("nds_feature_ranking matches the survivor oracle")
{
    Rng rng(31);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> mic;
        std::vector<std::size_t> freq;
        for (int i = 0; i < 300; ++i) {
            mic.push_back(double(rng.below(30)) / 30.0);
            freq.push_back(rng.below(25));
        }
        auto r = nds_feature_ranking(mic, freq, 200);
        CHECK(r.selected == oracle::feature_ranking(mic, freq, 200));
        auto ranks = oracle::nds_ranks([&] {
            double mx = double(*std::max_element(freq.begin(), freq.end()));
            std::vector<ObjectiveVector> pts;
            for (std::size_t i = 0; i < mic.size(); ++i) pts.push_back({ -mic[i], -double(freq[i]) / mx });
            return pts;
        }());
        for (std::size_t i = 0; i < mic.size(); ++i) CHECK(r.candidates[i].nds_rank == ranks[i]);
    }
}

TEST_CASE("shrink end to end")
{
    auto syn = generate_synthetic(80, 120, 5, 2);
    auto c = small_config();
    auto a = shrink(syn.data, c);
    CHECK(a.selected.size() == 20);
    CHECK(std::is_sorted(a.selected.begin(), a.selected.end()));
    CHECK(a.candidates.size() == 60);
    std::size_t marked = 0;
    for (auto const& cand : a.candidates) {
        if (cand.selected) {
            ++marked;
            CHECK(std::binary_search(a.selected.begin(), a.selected.end(), cand.column_id));
        }
    }
    CHECK(marked == 20);
    CHECK(a.evaluations == 2 * 3 * 20);
    CHECK(a.initial_evaluations == 2 * 20);

    auto filtered = mic_filter(syn.data, c);
    auto ids = filtered.filtered.column_ids();
    for (auto s : a.selected) CHECK(std::find(ids.begin(), ids.end(), s) != ids.end());

    auto b = shrink(syn.data, c);
    CHECK(a.selected == b.selected);
    CHECK(a.freq_scores == b.freq_scores);

    c.threads = 2;
    CHECK(shrink(syn.data, c).selected == a.selected);

    c.n_nds = 500;
    CHECK(shrink(syn.data, c).selected.size() == 60);

    c.pool = PoolMode::pareto_front;
    CHECK_NOTHROW(shrink(syn.data, c));
}

TEST_CASE("shrink keeps original column ids of a projected dataset")
{
    auto syn = generate_synthetic(80, 40, 3, 6);
    std::vector<std::size_t> odd;
    for (std::size_t i = 1; i < 40; i += 2) odd.push_back(i);
    auto d = project_columns(syn.data, odd);
    auto c = small_config();
    c.n_mic = 10;
    c.n_nds = 5;
    auto r = shrink(d, c);
    for (auto s : r.selected) CHECK(s % 2 == 1);
}

TEST_CASE("ShrinkResult JSON round trip")
{
    auto syn = generate_synthetic(60, 50, 3, 8);
    auto c = small_config();
    c.n_mic = 30;
    c.n_nds = 10;
    auto r = shrink(syn.data, c);
    auto j = to_json(r);
    auto back = shrink_result_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.selected == r.selected);
    CHECK(back.mic_scores == r.mic_scores);
    CHECK(back.freq_scores == r.freq_scores);
    CHECK(back.nds_rank == r.nds_rank);
    CHECK(back.evaluations == r.evaluations);
    CHECK(to_json(back) == j);
}
