#include <benchmark/benchmark.h>

#include "lago/lns.hpp"
#include "support.hpp"

using namespace lago;

static void BM_PdptwLns(benchmark::State& state) {
    Rng rng(5);
    const auto inst = testing::random_pdptw(rng, static_cast<int>(state.range(0)), 25);
    const double penalty = 1e5;
    const auto construct = [&](const pdptw::Instance& i) { return lns::pd::construct_cheapest_insertion(i, penalty); };
    const auto score = [&](const pdptw::Instance& i, const pdptw::Solution& s) {
        return lns::pd::score_removal_gain(i, s, penalty);
    };
    for (auto _ : state) benchmark::DoNotOptimize(lns::pd::search(inst, construct, score, {100, 60.0, 7}, penalty));
    state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_PdptwLns)->Arg(10)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_PdptwInsertRequest(benchmark::State& state) {
    Rng rng(6);
    const auto inst = testing::random_pdptw(rng, 40, 25);
    const auto base = lns::pd::construct_cheapest_insertion(inst, 1e5);
    const int victims[] = {1, 2, 3};
    for (auto _ : state) {
        auto sol = base;
        lns::pd::remove_requests(inst, sol, victims);
        for (int r : victims) lns::pd::insert_request(inst, sol, r, 1e5);
        benchmark::DoNotOptimize(sol);
    }
}
BENCHMARK(BM_PdptwInsertRequest);

static void BM_TspLns(benchmark::State& state) {
    Rng rng(8);
    const auto inst = testing::random_tsp(rng, static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(lns::ts::search(inst, lns::ts::construct_nearest_neighbor,
                                                 lns::ts::score_removal_gain, {200, 60.0, 9}, 1e5));
    state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_TspLns)->Arg(7)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_SampleNeighborhood(benchmark::State& state) {
    Rng rng(10);
    std::vector<double> scores(static_cast<std::size_t>(state.range(0)));
    for (auto& s : scores) s = rng.uniform();
    const auto q = lns::neighborhood_size(scores.size());
    for (auto _ : state) benchmark::DoNotOptimize(lns::sample_neighborhood(scores, q, rng));
}
BENCHMARK(BM_SampleNeighborhood)->Arg(100)->Arg(1000);
