#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "lmsss/dataset.hpp"
#include "lmsss/error.hpp"
#include "oracles.hpp"

using namespace lmsss;

TEST_CASE("load_csv encodes labels in first-appearance order")
{
    auto dir = testutil::temp_dir("csv_basic");
    testutil::write_text(dir / "a.csv", "x,y,label\n1,5,a\n2,6,b\n3,7,a\n4,8,b\n");
    auto d = load_csv(dir / "a.csv");
    CHECK(d.n_instances() == 4);
    CHECK(d.n_features() == 2);
    CHECK(std::vector<int>(d.labels().begin(), d.labels().end()) == std::vector<int> { 0, 1, 0, 1 });
    CHECK(d.class_names() == std::vector<std::string> { "a", "b" });
    CHECK(std::vector<std::size_t>(d.column_ids().begin(), d.column_ids().end()) == std::vector<std::size_t> { 0, 1 });
}

TEST_CASE("load_csv min-max normalises each feature")
{
    auto dir = testutil::temp_dir("csv_norm");
    testutil::write_text(dir / "a.csv", "x,c,label\n2,3,p\n4,3,q\n6,3,p\n");
    auto d = load_csv(dir / "a.csv");
    CHECK(d.at(0, 0) == 0.0);
    CHECK(d.at(1, 0) == 0.5);
    CHECK(d.at(2, 0) == 1.0);
    for (std::size_t r = 0; r < 3; ++r) CHECK(d.at(r, 1) == 0.0); // constant column
}

TEST_CASE("load_csv options: label by index or name, delimiter, no header, quoting")
{
    auto dir = testutil::temp_dir("csv_opts");
    testutil::write_text(dir / "a.csv", "cls;\"f;1\";f2\nA;1;2\nB;3;4\nA;5;6\n");
    CsvOptions o;
    o.delimiter = ';';
    o.label_column = std::string("cls");
    auto d = load_csv(dir / "a.csv", o);
    CHECK(d.n_features() == 2);
    CHECK(d.class_names() == std::vector<std::string> { "A", "B" });
    CHECK(std::vector<std::size_t>(d.column_ids().begin(), d.column_ids().end()) == std::vector<std::size_t> { 0, 1 });

    testutil::write_text(dir / "b.csv", "0,1,5\n1,2,6\n0,3,7\n");
    CsvOptions nh;
    nh.header = false;
    nh.label_column = std::size_t { 0 };
    nh.normalize = false;
    auto e = load_csv(dir / "b.csv", nh);
    CHECK(e.n_features() == 2);
    CHECK(e.at(2, 1) == 7.0);
}

TEST_CASE("load_csv errors")
{
    auto dir = testutil::temp_dir("csv_err");
    testutil::write_text(dir / "one.csv", "x,label\n1,a\n2,a\n3,a\n");
    CHECK_THROWS_WITH_AS(load_csv(dir / "one.csv"), doctest::Contains("fewer than 2 classes"), Error);

    testutil::write_text(dir / "ragged.csv", "x,y,label\n1,2,a\n1,b\n");
    CHECK_THROWS_WITH_AS(load_csv(dir / "ragged.csv"), doctest::Contains("line 3"), Error);

    testutil::write_text(dir / "text.csv", "x,label\n1,a\nfoo,b\n");
    CHECK_THROWS_WITH_AS(load_csv(dir / "text.csv"), doctest::Contains("column 1"), Error);

    testutil::write_text(dir / "nan.csv", "x,y,label\n1,2,a\n,4,b\n5,6,a\n");
    CHECK_THROWS_AS(load_csv(dir / "nan.csv"), Error);
    CsvOptions imp;
    imp.impute_mean = true;
    imp.normalize = false;
    auto d = load_csv(dir / "nan.csv", imp);
    CHECK(d.at(1, 0) == 3.0);

    CHECK_THROWS_AS(load_csv(dir / "missing.csv"), Error);
}

TEST_CASE("csv round trip")
{
    auto syn = generate_synthetic(60, 12, 3, 5);
    auto dir = testutil::temp_dir("csv_rt");
    write_csv(syn.data, dir / "d.csv");
    CsvOptions o;
    o.normalize = false;
    auto back = load_csv(dir / "d.csv", o);
    REQUIRE(back.n_instances() == syn.data.n_instances());
    REQUIRE(back.n_features() == syn.data.n_features());
    CHECK(std::equal(back.labels().begin(), back.labels().end(), syn.data.labels().begin()));
    double worst = 0;
    for (std::size_t i = 0; i < back.values().size(); ++i)
        worst = std::max(worst, std::abs(back.values()[i] - syn.data.values()[i]));
    CHECK(worst <= 1e-12);
}

TEST_CASE("stratified_split small example")
{
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
        rows.push_back({ double(i) });
        labels.push_back(i % 2);
    }
    auto d = testutil::make(rows, labels);
    auto s = stratified_split(d, 0.7, 1);
    CHECK(s.train.n_instances() == 7);
    auto counts = s.train.class_counts();
    for (auto c : counts) CHECK((c == 3 || c == 4));
    auto again = stratified_split(d, 0.7, 1);
    CHECK(again.train_rows == s.train_rows);
    CHECK(again.test_rows == s.test_rows);
    CHECK(partition_hash(again) == partition_hash(s));
}

TEST_CASE("stratified_split on a 62-instance two-class shape")
{
    // Colon shape: 40 / 22.
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 62; ++i) {
        rows.push_back({ double(i) });
        labels.push_back(i < 40 ? 0 : 1);
    }
    auto d = testutil::make(rows, labels);
    // Per-class floors are 28 and 15 (sum 43); one remainder goes to the
    // larger fractional part, so 43 or 44.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto s = stratified_split(d, 0.7, seed);
        CHECK((s.train.n_instances() == 43 || s.train.n_instances() == 44));
        auto c = s.train.class_counts();
        CHECK(std::abs(double(c[0]) - 0.7 * 40) <= 1.0);
        CHECK(std::abs(double(c[1]) - 0.7 * 22) <= 1.0);
        std::vector<std::size_t> all = s.train_rows;
        all.insert(all.end(), s.test_rows.begin(), s.test_rows.end());
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> expect(62);
        std::iota(expect.begin(), expect.end(), 0);
        CHECK(all == expect);
    }
}

TEST_CASE("stratified_split rejects a singleton class by name")
{
    auto d = testutil::make({ { 1 }, { 2 }, { 3 }, { 4 } }, { 0, 0, 0, 1 });
    CHECK_THROWS_WITH_AS(stratified_split(d, 0.7, 0), doctest::Contains("class '1'"), Error);
}

TEST_CASE("stratified_split: different seeds give different partitions")
{
    auto syn = generate_synthetic(100, 5, 2, 3);
    auto a = stratified_split(syn.data, 0.7, 1);
    auto b = stratified_split(syn.data, 0.7, 2);
    CHECK(a.train_rows != b.train_rows);
    CHECK(partition_hash(a) != partition_hash(b));
}

TEST_CASE("project_columns composes column ids")
{
    auto d = testutil::make({ { 1, 2, 3 }, { 4, 5, 6 } }, { 0, 1 });
    std::vector<std::size_t> a { 0, 2 };
    auto p = project_columns(d, a);
    CHECK(std::vector<std::size_t>(p.column_ids().begin(), p.column_ids().end()) == std::vector<std::size_t> { 0, 2 });
    CHECK(p.at(1, 1) == 6);

    std::vector<std::size_t> one { 1 }, zero { 0 };
    auto q = project_columns(project_columns(d, one), zero);
    CHECK(std::vector<std::size_t>(q.column_ids().begin(), q.column_ids().end()) == std::vector<std::size_t> { 1 });

    std::vector<std::size_t> all { 0, 1, 2 };
    CHECK(project_columns(d, all) == d);

    std::vector<std::size_t> bad { 3 }, dup { 1, 1 };
    CHECK_THROWS_AS(project_columns(d, bad), Error);
    CHECK_THROWS_AS(project_columns(d, dup), Error);
}

TEST_CASE("project_columns composition property")
{
    auto syn = generate_synthetic(40, 20, 2, 9);
    std::mt19937 gen(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::size_t> a(20);
        std::iota(a.begin(), a.end(), 0);
        std::shuffle(a.begin(), a.end(), gen);
        a.resize(1 + gen() % 20);
        std::vector<std::size_t> b(a.size());
        std::iota(b.begin(), b.end(), 0);
        std::shuffle(b.begin(), b.end(), gen);
        b.resize(1 + gen() % a.size());
        std::vector<std::size_t> ab;
        for (auto i : b) ab.push_back(a[i]);
        CHECK(project_columns(project_columns(syn.data, a), b) == project_columns(syn.data, ab));
    }
}

TEST_CASE("MinMaxScaler is fitted on one split and applied to another")
{
    auto train = testutil::make({ { 0, 5 }, { 10, 5 } }, { 0, 1 });
    auto test = testutil::make({ { 5, 7 }, { 20, 1 } }, { 0, 1 });
    auto s = MinMaxScaler::fit(train);
    auto t = s.apply(test);
    CHECK(t.at(0, 0) == 0.5);
    CHECK(t.at(1, 0) == 2.0);
    CHECK(t.at(0, 1) == 0.0);
}

TEST_CASE("generate_synthetic")
{
    auto a = generate_synthetic(200, 500, 10, 7);
    auto b = generate_synthetic(200, 500, 10, 7);
    CHECK(a.data == b.data);
    CHECK(a.informative == b.informative);
    CHECK(a.informative.size() == 10);
    CHECK(std::is_sorted(a.informative.begin(), a.informative.end()));
    auto [lo, hi] = std::minmax_element(a.data.values().begin(), a.data.values().end());
    CHECK(*lo >= 0.0);
    CHECK(*hi <= 1.0);
    CHECK_THROWS_AS(generate_synthetic(200, 10, 10, 1), Error);
    CHECK_THROWS_AS(generate_synthetic(39, 10, 2, 1), Error);

    // Informative columns classify better than the same number of noise columns.
    auto inf = FeatureMask::from_indices(500, a.informative);
    std::vector<std::size_t> noise;
    for (std::size_t c = 0; c < 500 && noise.size() < 10; ++c)
        if (!std::binary_search(a.informative.begin(), a.informative.end(), c)) noise.push_back(c);
    auto nm = FeatureMask::from_indices(500, noise);
    CHECK(oracle::loocv_error(a.data, inf, 5) < oracle::loocv_error(a.data, nm, 5));
}
