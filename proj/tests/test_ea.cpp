#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "helpers.hpp"
#include "lmsss/ea.hpp"
#include "lmsss/error.hpp"
#include "oracles.hpp"

using namespace lmsss;

namespace {

Individual with(std::vector<int> const& bits, double loss, double f1 = -1)
{
    FeatureMask m(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) m.set(i);
    Individual ind { m };
    ind.objectives = ObjectiveVector { f1 < 0 ? double(m.count()) / double(bits.size()) : f1, loss };
    return ind;
}

} // namespace

TEST_CASE("EAConfig validation")
{
    EAConfig c;
    CHECK_NOTHROW(c.validate());
    c.pop_size = 7;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.pr = 0.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.mutation_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    CHECK(c.mutation_rate_for(200) == doctest::Approx(1.0 / 200));
    c.mutation_rate = 0.01;
    CHECK(c.mutation_rate_for(200) == 0.01);
}

TEST_CASE("size-uniform initialisation spreads subset sizes")
{
    EAConfig c;
    c.init = InitMode::size_uniform;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        auto pop = init_population(200, c, rng);
        REQUIRE(pop.size() == 200);
        std::vector<double> sizes;
        for (auto const& ind : pop) {
            CHECK(ind.mask.count() >= 1);
            sizes.push_back(double(ind.mask.count()));
        }
        std::sort(sizes.begin(), sizes.end());
        // KS statistic against the discrete uniform on {1..200}.
        double ks = 0;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            double f_model = sizes[i] / 200.0;
            ks = std::max({ ks, std::abs(double(i + 1) / 200.0 - f_model), std::abs(double(i) / 200.0 - f_model) });
        }
        CHECK(ks < 0.15);
    }
}

TEST_CASE("bit-uniform initialisation")
{
    EAConfig c;
    c.init = InitMode::bit_uniform;
    Rng rng(3);
    auto pop = init_population(2000, c, rng);
    double mean = 0;
    for (auto const& ind : pop) mean += double(ind.mask.count());
    mean /= double(pop.size());
    CHECK(std::abs(mean - 1000.0) <= 3 * std::sqrt(2000 * 0.25));

    Rng a(5), b(5);
    auto x = init_population(50, c, a), y = init_population(50, c, b);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].mask == y[i].mask);

    // Width 1: every mask repaired to the single bit.
    Rng r1(0);
    for (auto const& ind : init_population(1, c, r1)) CHECK(ind.mask.count() == 1);
}

TEST_CASE("voting crossover rules")
{
    Rng rng(1);
    auto a = with({ 1, 0, 1, 1, 0, 0 }, 0.2);
    CHECK(voting_crossover(a, a, 0.7, rng) == a.mask);

    auto better = with({ 1, 1, 0, 0, 1, 0 }, 0.1);
    auto worse = with({ 0, 1, 1, 0, 0, 1 }, 0.4);
    CHECK(voting_crossover(better, worse, 1.0, rng) == better.mask);
    CHECK(voting_crossover(worse, better, 1.0, rng) == better.mask); // swapped to lead

    // Equal loss: lower f1 leads.
    auto small = with({ 1, 0, 0, 0, 0, 0 }, 0.3);
    auto large = with({ 0, 1, 1, 1, 0, 0 }, 0.3);
    CHECK(voting_crossover(large, small, 1.0, rng) == small.mask);

    auto narrow = with({ 1, 0 }, 0.1);
    CHECK_THROWS_AS(voting_crossover(a, narrow, 0.7, rng), Error);
    Individual bare { a.mask };
    CHECK_THROWS_AS(voting_crossover(bare, a, 0.7, rng), Error);
}

TEST_CASE("voting crossover bit frequencies")
{
    auto p1 = with({ 1, 1, 0, 0 }, 0.1);
    auto p2 = with({ 1, 0, 1, 0 }, 0.3);
    Rng rng(42);
    std::size_t ones[4] = { 0, 0, 0, 0 };
    std::size_t const draws = 10000;
    for (std::size_t t = 0; t < draws; ++t) {
        auto child = voting_crossover(p2, p1, 0.7, rng);
        for (std::size_t i = 0; i < 4; ++i) ones[i] += child.test(i);
    }
    CHECK(ones[0] == draws);
    CHECK(ones[3] == 0);
    CHECK(std::abs(double(ones[1]) / draws - 0.7) <= 0.02);
    CHECK(std::abs(double(ones[2]) / draws - 0.3) <= 0.02);
}

TEST_CASE("voting crossover preserves agreement on random parents")
{
    Rng rng(9);
    for (int t = 0; t < 200; ++t) {
        FeatureMask a(300), b(300);
        for (std::size_t i = 0; i < 300; ++i) {
            if (rng.bernoulli(0.3)) a.set(i);
            if (rng.bernoulli(0.3)) b.set(i);
        }
        Individual x { a, ObjectiveVector { 0.1, rng.uniform() } };
        Individual y { b, ObjectiveVector { 0.1, rng.uniform() } };
        auto c = voting_crossover(x, y, 0.7, rng);
        for (std::size_t i = 0; i < 300; ++i)
            if (a.test(i) == b.test(i)) CHECK(c.test(i) == a.test(i));
    }
}

TEST_CASE("uniform crossover")
{
    Rng rng(4);
    FeatureMask a(64), b(64);
    for (std::size_t i = 0; i < 32; ++i) a.set(i);
    for (std::size_t i = 16; i < 48; ++i) b.set(i);
    auto [c, d] = uniform_crossover(a, b, 0.0, rng);
    CHECK(c == a);
    CHECK(d == b);
    std::size_t swapped = 0;
    for (int t = 0; t < 200; ++t) {
        auto [x, y] = uniform_crossover(a, b, 1.0, rng);
        for (std::size_t i = 0; i < 64; ++i) {
            if (a.test(i) == b.test(i)) {
                CHECK(x.test(i) == a.test(i));
                CHECK(y.test(i) == a.test(i));
            } else {
                CHECK(x.test(i) != y.test(i));
                swapped += x.test(i) != a.test(i);
            }
        }
    }
    CHECK(std::abs(double(swapped) / (200 * 32) - 0.5) < 0.03);
}

TEST_CASE("flip mutation")
{
    Rng rng(6);
    FeatureMask m(200);
    for (std::size_t i = 0; i < 200; i += 3) m.set(i);
    double total = 0;
    for (int t = 0; t < 10000; ++t) {
        auto out = flip_mutation(m, 1.0 / 200, rng);
        std::size_t diff = 0;
        for (std::size_t i = 0; i < 200; ++i) diff += out.test(i) != m.test(i);
        total += double(diff);
    }
    CHECK(std::abs(total / 10000 - 1.0) <= 0.1);

    FeatureMask w(100);
    w.set(5);
    for (int t = 0; t < 100; ++t) CHECK(flip_mutation(w, 1e-12, rng) == w);

    auto full = FeatureMask::full(50);
    for (int t = 0; t < 100; ++t) CHECK(flip_mutation(full, 1.0, rng).count() >= 1);
}

TEST_CASE("revival mutation")
{
    EAConfig c;
    c.generations = 50;
    c.revival_window = 0.10;
    Rng rng(2);
    std::vector<Individual> pop;
    for (int i = 0; i < 10; ++i) {
        FeatureMask m(10);
        for (std::size_t b = 0; b < 10; ++b)
            if (b != 7) m.set(b);
        pop.push_back({ m, ObjectiveVector { 0.9, 0.5 }, 1 });
    }
    auto out = revival_mutation(pop, 0, c, rng);
    std::size_t gained = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].mask.test(7)) {
            ++gained;
            CHECK_FALSE(out[i].objectives.has_value());
        } else {
            CHECK(out[i].objectives.has_value());
        }
    }
    CHECK(gained == 1);
    CHECK(min_feature_coverage(out) >= 1);

    CHECK(revival_active(4, c));
    CHECK_FALSE(revival_active(5, c)); // ceil(0.1 * 50)
    auto late = revival_mutation(pop, 5, c, rng);
    for (std::size_t i = 0; i < pop.size(); ++i) CHECK(late[i].mask == pop[i].mask);

    c.revival_window = 0.0;
    CHECK_FALSE(revival_active(0, c));

    // Many absent features, small population: every column covered after.
    EAConfig wide;
    wide.generations = 10;
    Rng r2(8);
    std::vector<Individual> sparse;
    for (int i = 0; i < 4; ++i) {
        FeatureMask m(500);
        m.set(std::size_t(i));
        sparse.push_back({ m });
    }
    CHECK(min_feature_coverage(revival_mutation(sparse, 0, wide, r2)) >= 1);
}

TEST_CASE("evaluate")
{
    auto d = testutil::blobs(10, 100, 1);
    EAConfig c;
    Individual full { FeatureMask::full(100) };
    auto o = evaluate(full, d, c);
    CHECK(o.f1 == 1.0);
    CHECK(full.objectives.has_value());

    auto syn = generate_synthetic(60, 200, 3, 1);
    Individual five { FeatureMask::from_indices(200, std::vector<std::size_t> { 1, 2, 3, 4, 5 }) };
    CHECK(evaluate(five, syn.data, c).f1 == 0.025);

    // Column 0 separates the classes perfectly; column 1 is noise.
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) {
        rows.push_back({ i < 15 ? 0.0 + i * 0.01 : 1.0 + i * 0.01, double((i * 7) % 11) });
        labels.push_back(i < 15 ? 0 : 1);
    }
    auto sep = testutil::make(rows, labels);
    Individual alone { FeatureMask::from_indices(2, std::vector<std::size_t> { 0 }) };
    CHECK(evaluate(alone, sep, c).loss == 0.0);
}

TEST_CASE("Evaluator caches by mask")
{
    auto syn = generate_synthetic(60, 20, 3, 2);
    EAConfig c;
    Evaluator ev(syn.data, c);
    auto m = FeatureMask::from_indices(20, std::vector<std::size_t> { 1, 4 });
    std::vector<Individual> batch { { m }, { m }, { FeatureMask::full(20) } };
    ev.evaluate(batch);
    CHECK(ev.evaluations() == 3);
    CHECK(ev.classifier_calls() == 2);
    CHECK(*batch[0].objectives == *batch[1].objectives);
    CHECK(batch[0].eval_id != 0);
    std::vector<Individual> again { { m } };
    ev.evaluate(again);
    CHECK(ev.classifier_calls() == 2);
    CHECK(ev.evaluations() == 4);

    EAConfig threaded = c;
    threaded.threads = 3;
    Evaluator ev2(syn.data, threaded);
    std::vector<Individual> b2 { { m }, { m }, { FeatureMask::full(20) } };
    ev2.evaluate(b2);
    for (std::size_t i = 0; i < 3; ++i) CHECK(*b2[i].objectives == *batch[i].objectives);
}

TEST_CASE("environmental selection")
{
    SUBCASE("exact fit returns rank 0")
    {
        std::vector<Individual> pool;
        for (int i = 0; i < 4; ++i) pool.push_back(with({ 1, 0 }, 0.0, 0.1 * i));
        for (int i = 0; i < 4; ++i) pool.back().objectives->loss = 0.0;
        std::vector<ObjectiveVector> pts { { 0.1, 0.4 }, { 0.2, 0.3 }, { 0.3, 0.2 }, { 0.4, 0.1 }, { 0.5, 0.5 },
            { 0.6, 0.6 } };
        pool.clear();
        for (std::size_t i = 0; i < pts.size(); ++i) pool.push_back({ FeatureMask(3), pts[i], i });
        auto out = environmental_selection(pool, 4);
        REQUIRE(out.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) CHECK(out[i].eval_id < 4);
    }
    SUBCASE("boundary points of an oversized rank 0 survive")
    {
        std::vector<Individual> pool;
        for (std::size_t i = 0; i <= 10; ++i)
            pool.push_back({ FeatureMask(3), ObjectiveVector { i / 10.0, 1.0 - i / 10.0 }, i });
        auto out = environmental_selection(pool, 4);
        std::vector<std::uint64_t> ids;
        for (auto const& ind : out) ids.push_back(ind.eval_id);
        CHECK(std::find(ids.begin(), ids.end(), 0) != ids.end());
        CHECK(std::find(ids.begin(), ids.end(), 10) != ids.end());
    }
    SUBCASE("unevaluated member")
    {
        std::vector<Individual> pool { { FeatureMask(3) }, { FeatureMask(3) } };
        CHECK_THROWS_AS(environmental_selection(pool, 1), Error);
    }
    SUBCASE("matches the brute-force survivor oracle and is elitist")
    {
        Rng rng(77);
        for (int t = 0; t < 30; ++t) {
            std::vector<Individual> pool;
            std::vector<ObjectiveVector> pts;
            for (std::size_t i = 0; i < 400; ++i) {
                ObjectiveVector o { double(rng.below(40)) / 40.0, double(rng.below(40)) / 40.0 };
                pts.push_back(o);
                pool.push_back({ FeatureMask(1), o, i });
            }
            auto out = environmental_selection(pool, 200);
            REQUIRE(out.size() == 200);
            std::vector<std::size_t> got;
            for (auto const& ind : out) got.push_back(ind.eval_id);
            std::sort(got.begin(), got.end());
            CHECK(got == oracle::select_survivors(pts, 200));
            auto best = std::min_element(pts.begin(), pts.end(), [](auto const& a, auto const& b) {
                return a.loss != b.loss ? a.loss < b.loss : a.f1 < b.f1;
            });
            bool kept = false;
            for (auto const& ind : out) kept = kept || *ind.objectives == *best;
            CHECK(kept);
        }
    }
}

TEST_CASE("run_ea")
{
    auto syn = generate_synthetic(60, 40, 4, 3);
    EAConfig c;
    c.pop_size = 20;
    c.generations = 0;
    c.seed = 5;
    auto zero = run_ea(syn.data, c);
    REQUIRE(zero.history.size() == 1);
    CHECK(zero.evaluations == 20);
    std::vector<ObjectiveVector> pts;
    for (auto const& ind : zero.population) pts.push_back(ind.fitness());
    std::set<FeatureMask> rank0;
    auto const layers = oracle::nds_layers(pts);
    for (auto i : layers[0]) rank0.insert(zero.population[i].mask);
    std::set<FeatureMask> got;
    for (auto const& ind : zero.front) got.insert(ind.mask);
    CHECK(got == rank0);
    CHECK(got.size() == zero.front.size());

    c.generations = 12;
    c.revival_window = 0.25;
    auto a = run_ea(syn.data, c);
    auto b = run_ea(syn.data, c);
    REQUIRE(a.front.size() == b.front.size());
    for (std::size_t i = 0; i < a.front.size(); ++i) {
        CHECK(a.front[i].mask == b.front[i].mask);
        CHECK(a.front[i].fitness() == b.front[i].fitness());
    }
    CHECK(a.population.size() == 20);
    CHECK(a.history.size() == 13);
    CHECK(a.evaluations == 20 * 13);
    for (std::size_t g = 1; g < a.history.size(); ++g) {
        CHECK(a.history[g].best_loss <= a.history[g - 1].best_loss);
        if (revival_active(g - 1, c)) CHECK(a.history[g].offspring_coverage >= 1);
    }

    // Objectives carried by the population agree with a fresh evaluation.
    for (auto const& ind : a.population) {
        Individual copy { ind.mask };
        CHECK(evaluate(copy, syn.data, c) == ind.fitness());
    }

    c.threads = 3;
    auto t = run_ea(syn.data, c);
    REQUIRE(t.front.size() == a.front.size());
    for (std::size_t i = 0; i < a.front.size(); ++i) CHECK(t.front[i].mask == a.front[i].mask);

    EAConfig bad = c;
    bad.pop_size = 3;
    CHECK_THROWS_AS(run_ea(syn.data, bad), Error);
}

TEST_CASE("run_ea improves on its initial population")
{
    auto syn = generate_synthetic(200, 500, 10, 7);
    EAConfig c;
    c.generations = 50;
    c.seed = 1;
    auto r = run_ea(syn.data, c);
    double best_final = 1.0;
    for (auto const& ind : r.front) best_final = std::min(best_final, ind.fitness().loss);
    CHECK(best_final <= r.history.front().best_loss);
}
