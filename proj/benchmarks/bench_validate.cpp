#include <benchmark/benchmark.h>

#include "lago/lns.hpp"
#include "lago/pdptw.hpp"
#include "lago/tsp.hpp"
#include "support.hpp"

using namespace lago;

static void BM_PdptwValidate(benchmark::State& state) {
    Rng rng(1);
    const auto inst = testing::random_pdptw(rng, static_cast<int>(state.range(0)), 25);
    const auto sol = lns::pd::construct_route_per_request(inst);
    for (auto _ : state) benchmark::DoNotOptimize(pdptw::validate(inst, sol));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PdptwValidate)->RangeMultiplier(4)->Range(8, 512)->Complexity();

static void BM_PdptwWireRoundTrip(benchmark::State& state) {
    Rng rng(2);
    const auto inst = testing::random_pdptw(rng, 50, 25);
    for (auto _ : state) benchmark::DoNotOptimize(pdptw::from_wire(pdptw::to_wire(inst)));
}
BENCHMARK(BM_PdptwWireRoundTrip);

static void BM_TspValidate(benchmark::State& state) {
    Rng rng(3);
    const auto inst = testing::random_tsp(rng, static_cast<int>(state.range(0)));
    const auto tour = lns::ts::construct_identity(inst);
    for (auto _ : state) benchmark::DoNotOptimize(tsp::validate_tour(inst, tour));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TspValidate)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

static void BM_TspParse(benchmark::State& state) {
    Rng rng(4);
    const auto text = testing::tsplib_text(testing::random_tsp(rng, 1000));
    for (auto _ : state) benchmark::DoNotOptimize(tsp::parse_tsplib(text));
}
BENCHMARK(BM_TspParse);
