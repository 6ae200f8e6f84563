#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "elixir/errors.hpp"
#include "elixir/estimators.hpp"
#include "elixir/oracle.hpp"
#include "elixir/rng.hpp"

using namespace elixir;

namespace {

const PhaseSpec kLab{"LAB", 1.0};

AuProfile profile(const char* name, CameraSettings opt, double width = 6.0) {
    AuProfile au;
    au.name = name;
    au.width = width;
    au.optimum = {{"LAB", opt}};
    return au;
}

// Independent oracle for find_best_conf: score everything, full sort with
// the documented ordering, take the front.
OracleResult naive_best(const AuProfile& au, const PhaseSpec& phase,
                        const SettingsGrid& grid) {
    struct Row {
        CameraSettings s;
        double primary, secondary;
    };
    std::vector<Row> rows;
    auto clamped = [&](CameraSettings s, int dim, int dir) {
        s[static_cast<std::size_t>(dim)] = std::clamp(
            s[static_cast<std::size_t>(dim)] + dir * grid.step, 0, 100);
        return s;
    };
    for (const auto& s : grid.values) {
        double acc = 0.0;
        for (int dim = 0; dim < kNumDims; ++dim)
            for (const int dir : {-1, 1})
                acc += true_accuracy(au, clamped(s, dim, dir), phase);
        rows.push_back(Row{s, true_accuracy(au, s, phase), acc / 8.0});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.primary != b.primary) return a.primary > b.primary;
        if (a.secondary != b.secondary) return a.secondary > b.secondary;
        return a.s < b.s;
    });
    return OracleResult{rows.front().s, rows.front().primary,
                        rows.front().secondary,
                        static_cast<std::int64_t>(grid.values.size())};
}

} // namespace

TEST_CASE("find_best_conf recovers each profile's optimum on the full grid") {
    const auto grid = enumerate_grid(10);
    const AuProfile aus[] = {profile("FD", {60, 30, 40, 80}),
                             profile("PD", {80, 60, 50, 40}),
                             profile("CD", {70, 50, 60, 60})};
    for (const auto& au : aus) {
        const auto r = find_best_conf(au, kLab, grid);
        CHECK(r.best_settings == au.optimum.at("LAB"));
        CHECK(r.primary_score == 100.0);
        CHECK(r.evaluations == 14641);
    }
}

TEST_CASE("tie on primary falls to the neighbourhood-mean secondary") {
    // optimum between two grid points, next to the range end: [.,.,.,90] and
    // [.,.,.,100] tie on primary, but the clamped neighbourhood of 100
    // contains itself, so its mean is higher.
    const auto au = profile("FD", {50, 50, 50, 95}, 4.0);
    const auto grid = enumerate_grid(10);
    const auto r = find_best_conf(au, kLab, grid);
    const double at90 = true_accuracy(au, {50, 50, 50, 90}, kLab);
    const double at100 = true_accuracy(au, {50, 50, 50, 100}, kLab);
    REQUIRE(at90 == at100); // genuinely tied
    CHECK(r.best_settings == CameraSettings{50, 50, 50, 100});
}

TEST_CASE("flat surface falls through to the lexicographic tie-break") {
    const auto au = profile("FD", {60, 30, 40, 80}, 1e12);
    const auto grid = enumerate_grid(50);
    const auto r = find_best_conf(au, kLab, grid);
    CHECK(r.best_settings == CameraSettings{0, 0, 0, 0});
}

TEST_CASE("find_best_conf equals the naive two-pass oracle on random profiles") {
    const auto grid = enumerate_grid(25); // 5^4 keeps the naive side fast
    Rng rng(2718);
    for (int trial = 0; trial < 10; ++trial) {
        AuProfile au = profile("X", {static_cast<int>(rng.uniform_int(101)),
                                     static_cast<int>(rng.uniform_int(101)),
                                     static_cast<int>(rng.uniform_int(101)),
                                     static_cast<int>(rng.uniform_int(101))},
                               1.0 + rng.uniform() * 8.0);
        for (auto& w : au.dimension_weights) w = 0.5 + rng.uniform() * 2.0;
        const auto fast = find_best_conf(au, kLab, grid);
        const auto slow = naive_best(au, kLab, grid);
        CHECK(fast.best_settings == slow.best_settings);
        CHECK(fast.primary_score == slow.primary_score);
        CHECK(fast.secondary_score == doctest::Approx(slow.secondary_score).epsilon(1e-12));
        CHECK(fast.evaluations == slow.evaluations);
    }
}

TEST_CASE("thread count does not change the sweep result") {
    const auto grid = enumerate_grid(10);
    const auto au = profile("FD", {60, 30, 40, 80});
    const auto r1 = find_best_conf(au, kLab, grid, 1);
    const auto r4 = find_best_conf(au, kLab, grid, 4);
    CHECK(r1.best_settings == r4.best_settings);
    CHECK(r1.primary_score == r4.primary_score);
    CHECK(r1.secondary_score == r4.secondary_score);
}

TEST_CASE("conflict matrix: own optimum is column-maximal, strictly off-diagonal") {
    const auto grid = enumerate_grid(10);
    const std::vector<AuProfile> aus = {profile("FD", {60, 30, 40, 80}),
                                        profile("PD", {80, 60, 50, 40}),
                                        profile("CD", {70, 50, 60, 60})};
    const auto m = conflict_matrix(aus, kLab, grid);
    REQUIRE(m.entries.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t i = 0; i < 3; ++i) {
            if (i == j) {
                CHECK(m.entries[j][j] == 100.0);
            } else {
                CHECK(m.entries[i][j] < m.entries[j][j]);
            }
        }
    }

    // identical optima: no conflict, off-diagonal equals diagonal
    const std::vector<AuProfile> same = {profile("A", {60, 30, 40, 80}),
                                         profile("B", {60, 30, 40, 80})};
    const auto m2 = conflict_matrix(same, kLab, grid);
    CHECK(m2.entries[0][1] == m2.entries[1][1]);
    CHECK(m2.entries[1][0] == m2.entries[0][0]);

    const std::vector<AuProfile> one = {profile("A", {60, 30, 40, 80})};
    CHECK_THROWS_AS(conflict_matrix(one, kLab, grid), ConfigError);
}

TEST_CASE("common_optimal degenerates to find_best_conf for one AU") {
    const auto grid = enumerate_grid(10);
    const std::vector<AuProfile> one = {profile("FD", {60, 30, 40, 80})};
    const auto ca = common_optimal(one, kLab, grid, {StrategyKind::Linear, {}});
    const auto fb = find_best_conf(one[0], kLab, grid);
    CHECK(ca.best_settings == fb.best_settings);
    CHECK(ca.primary_score == fb.primary_score);
}

TEST_CASE("common_optimal lands on the midpoint for symmetric twins") {
    const auto grid = enumerate_grid(10);
    std::vector<AuProfile> twins = {profile("A", {40, 50, 50, 50}, 4.0),
                                    profile("B", {60, 50, 50, 50}, 4.0)};
    const auto r = common_optimal(twins, kLab, grid, {StrategyKind::Linear, {}});
    CHECK(r.best_settings == CameraSettings{50, 50, 50, 50});
}

TEST_CASE("common_optimal dominates per-AU optima and random grid points") {
    const auto grid = enumerate_grid(10);
    const std::vector<AuProfile> aus = {profile("FD", {60, 30, 40, 80}),
                                        profile("PD", {80, 60, 50, 40}),
                                        profile("CD", {70, 50, 60, 60})};
    const AggregationStrategy strat{StrategyKind::Linear, {}};
    const auto r = common_optimal(aus, kLab, grid, strat);
    auto agg_at = [&](const CameraSettings& s) {
        std::vector<double> per;
        for (const auto& au : aus) per.push_back(true_accuracy(au, s, kLab));
        return aggregate_value(per, strat);
    };
    CHECK(r.primary_score == doctest::Approx(agg_at(r.best_settings)).epsilon(1e-12));
    for (const auto& au : aus)
        CHECK(r.primary_score >= agg_at(au.optimum.at("LAB")));
    Rng rng(31337);
    for (int i = 0; i < 1000; ++i) {
        const CameraSettings s{static_cast<int>(rng.uniform_int(11)) * 10,
                               static_cast<int>(rng.uniform_int(11)) * 10,
                               static_cast<int>(rng.uniform_int(11)) * 10,
                               static_cast<int>(rng.uniform_int(11)) * 10};
        CHECK(r.primary_score >= agg_at(s));
    }
}

TEST_CASE("winner-takes-all common optimum sits on some AU's peak") {
    const auto grid = enumerate_grid(10);
    const std::vector<AuProfile> aus = {profile("FD", {60, 30, 40, 80}),
                                        profile("PD", {80, 60, 50, 40})};
    const auto r =
        common_optimal(aus, kLab, grid, {StrategyKind::WinnerTakesAll, {}});
    CHECK(r.primary_score == 100.0);
    const bool on_peak = r.best_settings == aus[0].optimum.at("LAB") ||
                         r.best_settings == aus[1].optimum.at("LAB");
    CHECK(on_peak);
}

TEST_CASE("post-transform boost never loses and is zero at the peak") {
    const auto grid = enumerate_grid(10);
    const auto au = profile("FD", {60, 30, 40, 80});

    // captured at the optimum: identity transform, no boost
    const auto at_peak = best_post_transform({60, 30, 40, 80}, au, kLab, grid);
    CHECK(at_peak.transform == CameraSettings{50, 50, 50, 50});
    CHECK(at_peak.boosted_score == 100.0);

    // captured off-peak: the best transform walks back to the optimum
    const CameraSettings off{70, 50, 60, 60};
    const auto boosted = best_post_transform(off, au, kLab, grid);
    CHECK(boosted.boosted_score >= true_accuracy(au, off, kLab));
    CHECK(boosted.boosted_score == doctest::Approx(100.0));
    CHECK(boosted.transform == CameraSettings{40, 30, 30, 70});

    // singleton identity grid: boost exactly zero
    SettingsGrid identity_only;
    identity_only.step = 100;
    identity_only.values = {CameraSettings{50, 50, 50, 50}};
    const auto none = best_post_transform(off, au, kLab, identity_only);
    CHECK(none.boosted_score == true_accuracy(au, off, kLab));

    // a grid without the identity is a configuration error
    CHECK_THROWS_AS(best_post_transform(off, au, kLab, enumerate_grid(20)),
                    ConfigError);
}
