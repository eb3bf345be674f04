#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "lago/error.hpp"
#include "lago/lns.hpp"
#include "lago/pdptw.hpp"
#include "lago/tsp.hpp"
#include "support.hpp"

using namespace lago;

TEST(Lns, NeighborhoodSize) {
    EXPECT_EQ(lns::neighborhood_size(1), 1u);
    EXPECT_EQ(lns::neighborhood_size(2), 2u);
    EXPECT_EQ(lns::neighborhood_size(7), 2u);
    EXPECT_EQ(lns::neighborhood_size(20), 3u);
    EXPECT_EQ(lns::neighborhood_size(100), 15u);
    EXPECT_EQ(lns::neighborhood_size(1000), 25u);
}

TEST(Lns, SampleNeighborhoodDistinctAndProportional) {
    Rng rng(1);
    const std::vector<double> scores{0.0, 9.0, -3.0, 1.0};
    std::vector<int> first(4, 0);
    for (int i = 0; i < 20000; ++i) {
        const auto pick = lns::sample_neighborhood(scores, 2, rng);
        ASSERT_EQ(pick.size(), 2u);
        ASSERT_NE(pick[0], pick[1]);
        ++first[pick[0]];
    }
    EXPECT_NEAR(first[1] / 20000.0, 0.9, 0.01);
    EXPECT_NEAR(first[3] / 20000.0, 0.1, 0.01);
    const std::vector<double> bad{std::nan(""), 1.0};
    EXPECT_EQ(lns::sample_neighborhood(bad, 2, rng).size(), 2u);
}

TEST(LnsPdptw, RouteCostMirrorsValidator) {
    // Pair-preserving solutions: every violation is one route_cost knows about,
    // plus fleet overflow.
    Rng rng(33);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(5));
        const int v = 1 + static_cast<int>(rng.below(3));
        const auto inst = lago::testing::random_pdptw(rng, n, v);
        pdptw::Solution sol;
        sol.routes.resize(1 + rng.below(4));
        for (const auto& req : inst.requests()) {
            auto& r = sol.routes[rng.below(sol.routes.size())];
            const auto i = rng.below(r.size() + 1);
            r.insert(r.begin() + static_cast<long>(i), req.pickup);
            const auto j = rng.below(r.size() + 1);
            r.insert(r.begin() + static_cast<long>(j), req.delivery);
        }
        double mirror = 0.0;
        int used = 0;
        for (const auto& r : sol.routes) {
            mirror += lns::pd::route_cost(inst, r, 1e5);
            used += !r.empty();
        }
        mirror += 1e5 * std::max(0, used - inst.vehicle_count());
        EXPECT_NEAR(mirror, pdptw::penalized_cost(inst, sol, 1e5), 1e-6);
        ++checked;
    }
    EXPECT_EQ(checked, 200);
}

TEST(LnsPdptw, RemoveAndInsert) {
    Rng rng(2);
    const auto inst = lago::testing::random_pdptw(rng, 4, 2);
    auto sol = lns::pd::construct_route_per_request(inst);
    EXPECT_EQ(sol.routes.size(), 4u);
    const std::vector<int> drop{0, 2};
    lns::pd::remove_requests(inst, sol, drop);
    for (const auto& r : sol.routes)
        for (int n : r) EXPECT_TRUE(inst.request_of(n) == 1 || inst.request_of(n) == 3);
    lns::pd::insert_request(inst, sol, 0, 1e5);
    lns::pd::insert_request(inst, sol, 2, 1e5);
    const auto rep = pdptw::validate(inst, sol);
    EXPECT_EQ(rep.breakdown.missing_or_duplicate_visit, 0);
    EXPECT_EQ(rep.breakdown.pair_split, 0);
    EXPECT_EQ(rep.breakdown.precedence, 0);
}

TEST(LnsPdptw, SearchNeverWorsensAndIsDeterministic) {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = lago::testing::random_pdptw(rng, 3, 2);
        const auto construct = [](const pdptw::Instance& i) { return lns::pd::construct_route_per_request(i); };
        const auto score = [](const pdptw::Instance& i, const pdptw::Solution& s) {
            return lns::pd::score_removal_gain(i, s, 1e5);
        };
        const lns::Budget budget{100, 10.0, 77};
        const auto a = lns::pd::search(inst, construct, score, budget, 1e5);
        const auto b = lns::pd::search(inst, construct, score, budget, 1e5);
        EXPECT_EQ(a.best, b.best);
        EXPECT_EQ(a.iterations_done, 100);
        EXPECT_LE(a.best_cost, pdptw::penalized_cost(inst, construct(inst), 1e5) + 1e-9);
        EXPECT_NEAR(a.best_cost, pdptw::penalized_cost(inst, a.best, 1e5), 1e-6);
        const auto opt = lago::testing::oracle_optimum(inst);
        if (opt && pdptw::validate(inst, a.best).feasible) {
            EXPECT_GE(a.best_cost, *opt - 1e-9);
        }
    }
}

TEST(LnsPdptw, SolvesTiny1) {
    const auto inst = pdptw::load_instance(lago::testing::data_path("pdptw_tiny/tiny1.pdptw"));
    const auto out = lns::pd::search(
        inst, [](const pdptw::Instance& i) { return lns::pd::construct_cheapest_insertion(i, 1e5); },
        [](const pdptw::Instance& i, const pdptw::Solution& s) { return lns::pd::score_removal_gain(i, s, 1e5); },
        {50, 10.0, 1}, 1e5);
    EXPECT_DOUBLE_EQ(out.best_cost, 4.0);
}

TEST(LnsPdptw, WrongScoreLengthIsUsageError) {
    const auto inst = pdptw::load_instance(lago::testing::data_path("pdptw_tiny/tiny2.pdptw"));
    EXPECT_THROW(lns::pd::search(
                     inst, [](const pdptw::Instance& i) { return lns::pd::construct_route_per_request(i); },
                     [](const pdptw::Instance&, const pdptw::Solution&) { return std::vector<double>{1.0}; },
                     {10, 10.0, 1}, 1e5),
                 UsageError);
}

TEST(LnsTsp, PenalizedLengthMirrorsValidator) {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const auto inst = lago::testing::random_tsp(rng, 3 + static_cast<int>(rng.below(10)));
        tsp::Tour t;
        const auto len = rng.below(inst.size() + 3);
        for (std::size_t i = 0; i < len; ++i) t.order.push_back(static_cast<int>(rng.below(inst.size())));
        const auto rep = tsp::validate_tour(inst, t);
        EXPECT_NEAR(lns::ts::penalized_length(inst, t, 1e5), rep.distance + 1e5 * rep.violation_count, 1e-6);
    }
}

TEST(LnsTsp, ReachesExhaustiveOptimumOnFixtures) {
    for (int k = 1; k <= 4; ++k) {
        const auto inst = tsp::load_tsplib(lago::testing::data_path("tsp/city7_" + std::to_string(k) + ".tsp"));
        const auto out = lns::ts::search(inst, lns::ts::construct_nearest_neighbor, lns::ts::score_removal_gain,
                                         {500, 10.0, 3}, 1e5);
        EXPECT_DOUBLE_EQ(out.best_cost, lago::testing::oracle_tsp_optimum(inst)) << inst.name;
        EXPECT_TRUE(tsp::validate_tour(inst, out.best).feasible);
    }
}

TEST(LnsTsp, TimeLimitStopsEarly) {
    Rng rng(1);
    const auto inst = lago::testing::random_tsp(rng, 200);
    const auto out = lns::ts::search(inst, lns::ts::construct_identity, lns::ts::score_uniform,
                                     {1000000, 0.05, 1}, 1e5);
    EXPECT_TRUE(out.hit_time_limit);
    EXPECT_LT(out.iterations_done, 1000000);
}
