#include <benchmark/benchmark.h>

#include "lago/environment.hpp"
#include "lago/prompts.hpp"
#include "lago/sandbox.hpp"
#include "support.hpp"

using namespace lago;

// Wire round trip through a live harness process; dominated by JSON and pipe I/O.
static void BM_SandboxEvaluateTiny(benchmark::State& state) {
    const auto inst = load_problem(EnvKind::pdptw, testing::data_path("pdptw_tiny/tiny6.pdptw"));
    const std::string code(prompts::baseline_code(EnvKind::pdptw));
    sandbox::Client client(testing::harness_command());
    client.handshake();
    sandbox::EvaluateRequest req{EnvKind::pdptw, inst.to_wire(), code, code, 1, 10.0, 1};
    for (auto _ : state) benchmark::DoNotOptimize(client.evaluate(req));
    client.shutdown();
}
BENCHMARK(BM_SandboxEvaluateTiny)->Unit(benchmark::kMicrosecond);

static void BM_SandboxSpawnHandshake(benchmark::State& state) {
    for (auto _ : state) {
        sandbox::Client client(testing::harness_command());
        benchmark::DoNotOptimize(client.handshake());
        client.shutdown();
    }
}
BENCHMARK(BM_SandboxSpawnHandshake)->Unit(benchmark::kMillisecond);
