#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "lago/environment.hpp"
#include "lago/error.hpp"
#include "lago/metrics.hpp"
#include "lago/tsp.hpp"
#include "support.hpp"

using namespace lago;

namespace {

tsp::Instance from_points(std::vector<tsp::Point> pts) {
    tsp::Instance inst;
    inst.name = "t";
    inst.coords = std::move(pts);
    return inst;
}

}  // namespace

TEST(TspParse, Minimal) {
    const auto inst = tsp::parse_tsplib(
        "NAME: three\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 0\n3 2 0\nEOF\n");
    EXPECT_EQ(inst.name, "three");
    ASSERT_EQ(inst.size(), 3u);
    EXPECT_EQ(inst.coords[2], (tsp::Point{2, 0}));
}

TEST(TspParse, HundredCitiesMatchesDimension) {
    Rng rng(100);
    const auto inst = lago::testing::random_tsp(rng, 100, "synthetic100");
    const auto parsed = tsp::parse_tsplib(lago::testing::tsplib_text(inst));
    EXPECT_EQ(parsed.name, "synthetic100");
    EXPECT_EQ(parsed.size(), 100u);
    EXPECT_EQ(parsed, inst);
}

TEST(TspParse, ExplicitIsUnsupported) {
    EXPECT_THROW(tsp::parse_tsplib("NAME: x\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\n"
                                   "EDGE_WEIGHT_SECTION\n1 2 3\nEOF\n"),
                 UnsupportedFormatError);
}

TEST(TspParse, Malformed) {
    EXPECT_THROW(tsp::parse_tsplib("NAME: x\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\nEOF\n"),
                 ParseError);
    EXPECT_THROW(tsp::parse_tsplib("NAME: x\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 1\nEOF\n"),
                 ParseError);
}

TEST(TspLength, Examples) {
    const auto square = from_points({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    EXPECT_DOUBLE_EQ(tsp::tour_length(square, {{0, 1, 2, 3}}), 4.0);
    const auto line = from_points({{0, 0}, {1, 0}, {2, 0}});
    EXPECT_DOUBLE_EQ(tsp::tour_length(line, {{0, 1, 2}}), 4.0);
    EXPECT_THROW(tsp::tour_length(line, {{0, 0, 2}}), UsageError);
}

TEST(TspLength, NearestIntegerEdges) {
    // sqrt(2) rounds to 1, sqrt(8) to 3.
    const auto inst = from_points({{0, 0}, {1, 1}, {3, 3}});
    EXPECT_DOUBLE_EQ(inst.dist(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(inst.dist(1, 2), 3.0);
}

TEST(TspLength, RotationAndReversalInvariant) {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const auto inst = lago::testing::random_tsp(rng, 3 + static_cast<int>(rng.below(12)));
        std::vector<int> order(inst.size());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        const double base = tsp::tour_length(inst, {order});
        EXPECT_DOUBLE_EQ(base, lago::testing::oracle_length(inst, order));
        auto rot = order;
        std::rotate(rot.begin(), rot.begin() + static_cast<long>(rng.below(rot.size())), rot.end());
        EXPECT_DOUBLE_EQ(tsp::tour_length(inst, {rot}), base);
        std::reverse(rot.begin(), rot.end());
        EXPECT_DOUBLE_EQ(tsp::tour_length(inst, {rot}), base);
    }
}

TEST(TspValidate, Examples) {
    const auto inst = from_points({{0, 0}, {1, 0}, {2, 0}});
    const auto ok = tsp::validate_tour(inst, {{0, 1, 2}});
    EXPECT_TRUE(ok.feasible);
    EXPECT_DOUBLE_EQ(ok.distance, 4.0);
    const auto dup = tsp::validate_tour(inst, {{0, 0, 2}});
    EXPECT_FALSE(dup.feasible);
    EXPECT_EQ(dup.violation_count, 2);
    EXPECT_EQ(dup.breakdown.missing_or_duplicate_visit, 2);
    const auto empty = tsp::validate_tour(inst, {{}});
    EXPECT_EQ(empty.violation_count, 3);
    EXPECT_FALSE(tsp::validate_tour(inst, {{0, 1, 7}}).feasible);
}

TEST(TspWire, RoundTrip) {
    const auto inst = tsp::load_tsplib(lago::testing::data_path("tsp/city7_1.tsp"));
    EXPECT_EQ(tsp::from_wire(tsp::to_wire(inst)), inst);
    const tsp::Tour t{{3, 1, 2, 0}};
    EXPECT_EQ(tsp::tour_from_wire(tsp::to_wire(t)), t);
}

TEST(TspBestKnown, FixturesMatchOracle) {
    const auto reg = BestKnownRegistry::load(lago::testing::data_path("tsp/best_known.tsv"));
    const auto all = load_instance_dir(EnvKind::tsp, lago::testing::data_path("tsp"));
    ASSERT_EQ(all.size(), 4u);
    for (const auto& p : all)
        EXPECT_DOUBLE_EQ(reg.at(p.name()), lago::testing::oracle_tsp_optimum(p.as_tsp())) << p.name();
}
