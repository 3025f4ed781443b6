#include <doctest.h>

#include <algorithm>
#include <set>

#include "cemm/tabular.hpp"
#include "test_support.hpp"

using namespace cemm;
using testsup::join_lines;
using testsup::make_dataset;

TEST_CASE("schema parses names and kinds") {
    Schema s = parse_schema("age,numeric\nsmoker,binary\noutcome,label_class\n");
    REQUIRE(s.columns.size() == 3);
    CHECK(s.columns[0].name == "age");
    CHECK(s.columns[0].kind == ColumnKind::numeric);
    CHECK(s.columns[1].kind == ColumnKind::binary);
    CHECK(s.columns[2].kind == ColumnKind::label_class);
    CHECK(s.label_column() == 2);
    CHECK(s.task() == Task::classification);
}

TEST_CASE("schema rejects invalid declarations") {
    CHECK_THROWS_WITH_AS(parse_schema("a,numeric\ny,label_class\nz,label_real\n"),
                         doctest::Contains("multiple labels"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_schema("a,float\ny,label_class\n"),
                         doctest::Contains("unknown kind"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_schema("a,numeric\na,binary\ny,label_class\n"),
                         doctest::Contains("duplicate"), std::invalid_argument);
    CHECK_THROWS_AS(parse_schema("a,numeric\nb,binary\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_schema(""), std::invalid_argument);
}

TEST_CASE("schema accepts prediction columns") {
    Schema s = parse_schema("a,numeric\nscore,prediction\ny,label_real\n");
    CHECK(s.columns[1].kind == ColumnKind::prediction);
    CHECK(s.task() == Task::regression);
}

static const char* kSchema4 = "age,numeric\nsmoker,binary\ncity,nominal\noutcome,label_class\n";

TEST_CASE("dataset load types values and interns nominals") {
    Dataset d = make_dataset(kSchema4, join_lines({
                                           "age,smoker,city,outcome",
                                           "31,1,oslo,yes",
                                           "44,0,bergen,no",
                                           "27,1,oslo,yes",
                                           "58,0,tromso,no",
                                       }));
    REQUIRE(d.size() == 4);
    CHECK(d.numeric_value(0, 0) == 31.0);
    CHECK(d.numeric_value(1, 1) == 0.0);
    // value sets recorded after load, sorted
    CHECK(d.schema().columns[2].values == std::vector<std::string>{"bergen", "oslo", "tromso"});
    CHECK(d.schema().columns[3].values == std::vector<std::string>{"no", "yes"});
    CHECK(d.category_value(2, 0) == 1);  // oslo
    CHECK(d.label_class(1) == 0);        // no
    CHECK(d.record_ids() == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("dataset accepts permuted header, matching by name") {
    Dataset d = make_dataset(kSchema4, join_lines({
                                           "outcome,city,age,smoker",
                                           "yes,oslo,31,1",
                                           "no,bergen,44,0",
                                       }));
    CHECK(d.numeric_value(0, 0) == 31.0);
    CHECK(d.numeric_value(1, 1) == 0.0);
}

TEST_CASE("dataset load rejects malformed rows") {
    CHECK_THROWS_WITH_AS(
        make_dataset(kSchema4, "age,smoker,city,outcome\n31,2,oslo,yes\n"),
        doctest::Contains("row 1"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(make_dataset(kSchema4, "age,smoker,city,outcome\nabc,1,oslo,yes\n"),
                         doctest::Contains("non-numeric"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(make_dataset(kSchema4, "age,smoker,city,outcome\n31,1,oslo\n"),
                         doctest::Contains("missing field"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(make_dataset(kSchema4, "age,smoker,city\n31,1,oslo\n"),
                         doctest::Contains("header mismatch"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(make_dataset(kSchema4, "age,smoker,city,outcome\ninf,1,oslo,yes\n"),
                         doctest::Contains("non-"), std::invalid_argument);
    CHECK_THROWS_AS(make_dataset(kSchema4, "age,smoker,city,outcome\n"), std::invalid_argument);
}

static Dataset ten_records() {
    std::vector<std::string> lines{"age,smoker,city,outcome"};
    for (int i = 0; i < 10; ++i)
        lines.push_back(std::to_string(20 + i) + "," + std::to_string(i % 2) + ",oslo," +
                        (i % 3 ? "yes" : "no"));
    return make_dataset(kSchema4, join_lines(lines));
}

TEST_CASE("split is a deterministic disjoint partition") {
    Dataset d = ten_records();
    SplitPair p = split_calibration_test(d, 0.5, 7);
    CHECK(p.calibration.size() == 5);
    CHECK(p.test.size() == 5);

    std::set<int> ids(p.calibration.record_ids().begin(), p.calibration.record_ids().end());
    ids.insert(p.test.record_ids().begin(), p.test.record_ids().end());
    CHECK(ids.size() == 10);

    SplitPair again = split_calibration_test(d, 0.5, 7);
    CHECK(again.calibration.record_ids() == p.calibration.record_ids());
    CHECK(again.test.record_ids() == p.test.record_ids());
}

TEST_CASE("different seeds produce different partitions") {
    Dataset d = ten_records();
    std::set<std::vector<int>> signatures;
    for (std::uint64_t seed = 0; seed < 16; ++seed)
        signatures.insert(split_calibration_test(d, 0.5, seed).calibration.record_ids());
    CHECK(signatures.size() > 1);
}

TEST_CASE("split rejects sides smaller than two") {
    Dataset d = make_dataset(kSchema4, join_lines({"age,smoker,city,outcome", "1,0,a,x",
                                                   "2,1,a,y", "3,0,b,x"}));
    CHECK_THROWS_WITH_AS(split_calibration_test(d, 0.5, 1), doctest::Contains("side too small"),
                         std::invalid_argument);
    CHECK_THROWS_AS(split_calibration_test(ten_records(), 1.5, 1), std::invalid_argument);
}

TEST_CASE("split partition law over random seeds") {
    std::vector<std::string> lines{"age,smoker,city,outcome"};
    for (int i = 0; i < 37; ++i)
        lines.push_back(std::to_string(i) + ",0,a," + (i % 2 ? "x" : "y"));
    Dataset d = make_dataset(kSchema4, join_lines(lines));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SplitPair p = split_calibration_test(d, 0.4, seed);
        CHECK(p.calibration.size() == 14);
        std::set<int> all(p.calibration.record_ids().begin(), p.calibration.record_ids().end());
        for (int id : p.test.record_ids()) CHECK(all.insert(id).second);
        CHECK(all.size() == 37);
    }
}

TEST_CASE("equal-width cut points") {
    std::vector<std::string> lines{"age,smoker,city,outcome"};
    for (int i = 0; i <= 8; ++i) lines.push_back(std::to_string(i) + ",0,a,x");
    Dataset d = make_dataset(kSchema4, join_lines(lines));
    CHECK(numeric_cut_points(d, "age", 4) == std::vector<double>{2.0, 4.0, 6.0});

    Dataset binary_range = make_dataset(
        kSchema4, join_lines({"age,smoker,city,outcome", "0,0,a,x", "1,0,a,y"}));
    CHECK(numeric_cut_points(binary_range, "age", 2) == std::vector<double>{0.5});
}

TEST_CASE("cut points on constant column are empty") {
    Dataset d = make_dataset(kSchema4, join_lines({"age,smoker,city,outcome", "5,0,a,x",
                                                   "5,1,b,y", "5,0,a,x"}));
    CHECK(numeric_cut_points(d, "age", 8).empty());
}

TEST_CASE("cut points validate the attribute") {
    Dataset d = ten_records();
    CHECK_THROWS_AS(numeric_cut_points(d, "smoker", 4), std::invalid_argument);
    CHECK_THROWS_AS(numeric_cut_points(d, "nope", 4), std::invalid_argument);
    CHECK_THROWS_AS(numeric_cut_points(d, "age", 1), std::invalid_argument);
}

TEST_CASE("cut points stay strictly increasing inside the observed range") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<std::string> lines{"age,smoker,city,outcome"};
        int n = 3 + static_cast<int>(next_below(gen, 60));
        double lo = 1e18, hi = -1e18;
        for (int i = 0; i < n; ++i) {
            double v = next_unit(gen) * 20.0 - 10.0;
            if (next_below(gen, 4) == 0) v = std::floor(v);  // encourage duplicates
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            lines.push_back(testsup::fmt(v) + ",0,a,x");
        }
        Dataset d = make_dataset(kSchema4, join_lines(lines));
        for (CutStrategy strategy : {CutStrategy::equal_width, CutStrategy::equal_frequency}) {
            auto cuts = numeric_cut_points(d, "age", 2 + static_cast<int>(next_below(gen, 9)),
                                           strategy);
            for (std::size_t i = 0; i < cuts.size(); ++i) {
                CHECK(cuts[i] > lo);
                CHECK(cuts[i] < hi);
                if (i > 0) CHECK(cuts[i] > cuts[i - 1]);
            }
        }
    }
}

TEST_CASE("equal-frequency cuts follow the value mass") {
    std::vector<std::string> lines{"age,smoker,city,outcome"};
    // heavily skewed: 20 values near zero, 2 large
    for (int i = 0; i < 20; ++i) lines.push_back(testsup::fmt(i * 0.01) + ",0,a,x");
    lines.push_back("100,0,a,x");
    lines.push_back("200,0,a,x");
    Dataset d = make_dataset(kSchema4, join_lines(lines));
    auto eq_width = numeric_cut_points(d, "age", 4, CutStrategy::equal_width);
    auto eq_freq = numeric_cut_points(d, "age", 4, CutStrategy::equal_frequency);
    REQUIRE(!eq_freq.empty());
    REQUIRE(!eq_width.empty());
    CHECK(eq_freq.front() < 1.0);    // tracks the dense mass
    CHECK(eq_width.front() > 10.0);  // tracks the range
}

TEST_CASE("subset keeps schema and original record ids") {
    Dataset d = ten_records();
    Dataset sub = d.subset({1, 3, 7});
    CHECK(sub.size() == 3);
    CHECK(sub.record_ids() == std::vector<int>{1, 3, 7});
    CHECK(sub.numeric_value(0, 0) == 21.0);
    CHECK(sub.schema().columns[2].values == d.schema().columns[2].values);
}
