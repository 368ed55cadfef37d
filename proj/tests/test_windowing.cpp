#include "dystrat/windowing.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "dystrat/rng.hpp"

using namespace dystrat;

namespace {
TimeSeries make_series(int n, std::uint64_t seed) {
    Rng rng(seed);
    TimeSeries ts{"s", {}, SeriesSource::csv};
    for (int i = 0; i < n; ++i) ts.values.push_back(rng.uniform());
    return ts;
}
}  // namespace

TEST_CASE("sliding windows", "[windowing]") {
    SECTION("hand-worked small case") {
        TimeSeries ts{"t", {1, 2, 3, 4, 5}, SeriesSource::csv};
        const auto ds = make_windows(ts, 2, 2);
        REQUIRE(ds.size() == 2);
        REQUIRE(ds.inputs(0, 0) == 1.0);
        REQUIRE(ds.inputs(0, 1) == 2.0);
        REQUIRE(ds.inputs(1, 0) == 2.0);
        REQUIRE(ds.inputs(1, 1) == 3.0);
        REQUIRE(ds.targets(0, 0) == 3.0);
        REQUIRE(ds.targets(0, 1) == 4.0);
        REQUIRE(ds.targets(1, 0) == 4.0);
        REQUIRE(ds.targets(1, 1) == 5.0);
    }
    SECTION("window count formula") {
        const auto ds = make_windows(make_series(100, 1), 10, 20);
        REQUIRE(ds.size() == 71);
    }
    SECTION("boundary length") {
        REQUIRE_THROWS_AS(make_windows(make_series(29, 1), 10, 20), InvalidParameterError);
        REQUIRE(make_windows(make_series(30, 1), 10, 20).size() == 1);
    }
    SECTION("reconstructibility: rows are contiguous slices of the source") {
        const auto ts = make_series(60, 2);
        const auto ds = make_windows(ts, 7, 4);
        for (int i = 0; i < ds.size(); ++i) {
            const int o = ds.origin_indices[static_cast<std::size_t>(i)];
            for (int j = 0; j < 7; ++j) REQUIRE(ds.inputs(i, j) == ts.values[static_cast<std::size_t>(o + j)]);
            for (int j = 0; j < 4; ++j) REQUIRE(ds.targets(i, j) == ts.values[static_cast<std::size_t>(o + 7 + j)]);
        }
    }
}

TEST_CASE("chronological split", "[windowing]") {
    const auto ds = make_windows(make_series(111, 3), 8, 4);  // 100 instances
    REQUIRE(ds.size() == 100);
    SECTION("documented worked example") {
        const auto [train, eval] = split(ds, {0.75, 0.10});
        REQUIRE(eval.size() == 10);
        REQUIRE(train.size() == 67);
        REQUIRE(eval.origin_indices.front() == 90);
        REQUIRE(train.origin_indices.front() == 0);
    }
    SECTION("full train fraction uses every non-eval instance") {
        const auto [train, eval] = split(ds, {1.0, 0.10});
        REQUIRE(train.size() == 90);
        REQUIRE(eval.size() == 10);
    }
    SECTION("partitions are disjoint and ordered") {
        const auto [train, eval] = split(ds, {0.5, 0.2});
        REQUIRE(train.origin_indices.back() < eval.origin_indices.front());
    }
    SECTION("small training regime") {
        const auto big = make_windows(make_series(10000 + 11, 4), 8, 4);
        const auto [train, eval] = split(big, {0.10, 0.10});
        REQUIRE(eval.size() == 1000);
        REQUIRE(train.size() == 900);
    }
    SECTION("degenerate fractions rejected") {
        REQUIRE_THROWS_AS(split(ds, {0.75, 0.0}), InvalidParameterError);
        REQUIRE_THROWS_AS(split(ds, {0.0, 0.1}), InvalidParameterError);
        const auto tiny = make_windows(make_series(13, 5), 8, 4);  // 2 instances
        REQUIRE_THROWS_AS(split(tiny, {0.1, 0.5}), InvalidSplitError);
    }
}
