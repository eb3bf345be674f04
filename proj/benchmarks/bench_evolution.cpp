#include <benchmark/benchmark.h>

#include "lago/generator.hpp"
#include "lago/rng.hpp"

using namespace lago;

namespace {

std::vector<Member> members(Rng& rng, int count, std::size_t dims, const std::string& prefix) {
    std::vector<Member> out;
    for (int i = 0; i < count; ++i) {
        std::vector<double> fv(dims);
        for (auto& v : fv) v = rng.uniform();
        Member m;
        m.individual.id = prefix + std::to_string(i);
        m.fitness = FitnessVector(std::move(fv));
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace

static void BM_Survive(benchmark::State& state) {
    Rng rng(1);
    const int n = static_cast<int>(state.range(0));
    const auto pop = members(rng, n, 30, "p");
    const auto cands = members(rng, n, 30, "c");
    const SurvivalConfig cfg{n, 2, 5.0, 1e-6};
    for (auto _ : state) benchmark::DoNotOptimize(survive(pop, cands, cfg, rng, 1));
}
BENCHMARK(BM_Survive)->Arg(10)->Arg(40)->Arg(160);

static void BM_SelectParents(benchmark::State& state) {
    Rng rng(2);
    Population pop;
    pop.members = members(rng, 10, 30, "p");
    const SurvivalConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(select_parents(pop, Operator::e1, cfg, rng));
}
BENCHMARK(BM_SelectParents);

static void BM_ExtractCode(benchmark::State& state) {
    std::string response = "Reasoning first.\n\n```python\n\"\"\"{Greedy with slack.}\"\"\"\nimport math\n\n";
    for (int i = 0; i < 40; ++i) response += "def helper_" + std::to_string(i) + "(x):\n    return x * 2\n\n";
    response += "def _init_solution(instance):\n    return {}\n\ndef heuristic(instance, solution):\n    return []\n```\n";
    for (auto _ : state) benchmark::DoNotOptimize(extract_code(response));
}
BENCHMARK(BM_ExtractCode);
