#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lago/analyst.hpp"
#include "lago/environment.hpp"
#include "lago/forward_eval.hpp"
#include "lago/generator.hpp"
#include "lago/llm.hpp"
#include "lago/metrics.hpp"

namespace lago {

struct RunConfig {
    EnvKind env = EnvKind::pdptw;
    std::string instance_dir;
    std::string registry_path;
    int iterations = 20;
    OperatorSchedule schedule;
    SurvivalConfig survival;
    EvalBudget budget;
    double penalty = 1e5;
    bool analyst_enabled = true;
    int max_features = 8;
    double feature_timeout_s = 2.0;
    int max_repairs = 2;
    llm::Backend backend = llm::Backend::replay;
    std::string replay_log;
    std::uint64_t master_seed = 0;
    double split_ratio = 0.5;
    std::uint64_t split_seed = 0;
    std::vector<std::string> harness_command{"python3", "-m", "lago_harness"};
    unsigned workers = 1;
    std::string model;
    double temperature = 1.0;
    std::optional<std::string> reasoning_effort = "medium";
    long completion_token_ceiling = 5'000'000;
    int max_retries = 2;

    /// Throws ConfigError naming the offending key.
    void check() const;

    /// Relative paths (and a relative harness executable containing '/') are
    /// resolved against `base_dir`. Unknown keys are rejected.
    static RunConfig from_json(const nlohmann::json& doc, const std::string& base_dir = ".");
    static RunConfig load(const std::string& path);
    nlohmann::json to_json() const;
};

/// Fisher-Yates under `seed`, first ceil(ratio * n) to train; each side is
/// then returned in name order. Throws UsageError for fewer than two names.
struct Split {
    std::vector<std::string> train;
    std::vector<std::string> test;
};
Split split_dataset(std::vector<std::string> names, double ratio, std::uint64_t seed);

struct ConvergenceRow {
    int iteration = 0;
    double best_internal_fitness = 0.0;
    double mean_internal_fitness = 0.0;
    double best_train_qyi = 0.0;
};

struct RunReport {
    std::vector<ConvergenceRow> rows;
    std::optional<Member> best;
    std::optional<QualityYield> train;
    std::optional<QualityYield> test;
    double wall_time_s = 0.0;
    llm::TokenUsage usage;
    std::string markdown;
    /// Non-empty when the run stopped early; the report then covers completed iterations only.
    std::string aborted;
};

/// Runs the full loop into `out_dir`, resuming after the last completed
/// iteration found there. Writes config.snapshot, llm_log.jsonl,
/// iter_<k>/{population,traces}.json, final/test_traces.json, run_stats.json,
/// convergence.csv and report.md.
RunReport run(const RunConfig& cfg, const std::string& out_dir);

/// Recomputes convergence.csv and report.md from the run directory alone and
/// writes them there. Throws ConfigError listing absent artifacts.
RunReport report(const std::string& run_dir);

/// Evaluates one generated-style module on the given instances.
ForwardEvaluator::Result evaluate_module(const RunConfig& cfg, const std::string& module_source,
                                         std::span<const ProblemInstance> instances,
                                         const BestKnownRegistry& registry);

}  // namespace lago
