#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lago/environment.hpp"
#include "lago/metrics.hpp"
#include "lago/model.hpp"
#include "lago/validation.hpp"

namespace lago {

inline constexpr std::size_t kMaxErrorText = 2000;

struct EvalBudget {
    int lns_iterations = 200;
    double time_limit_s = 10.0;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless both limits are positive.
    void check() const;
};

/// Outcome of one heuristic on one instance. Costs and violations are the
/// primary validator's verdict; the harness's own numbers are never trusted.
struct TraceRecord {
    std::string instance;
    std::optional<nlohmann::json> solution;
    double raw_cost = 0.0;
    int violation_count = 0;
    ViolationBreakdown breakdown;
    bool feasible = false;
    double penalized_cost = 0.0;
    double internal_fitness = 0.0;
    double wall_time = 0.0;
    int lns_iterations = 0;
    std::string error_text;
    bool timed_out = false;
};

struct ExecutionTrace {
    std::string individual_id;
    std::vector<TraceRecord> records;

    std::string first_error() const;
    /// (feasible, raw cost) per instance, for quality/yield reporting.
    std::vector<InstanceOutcome> outcomes() const;
};

struct EvalSettings {
    std::vector<std::string> harness_command;
    EvalBudget budget;
    double penalty = 1e5;
    unsigned workers = 1;
};

/// Builds a record from a harness-returned solution, re-validating it against `inst`.
TraceRecord record_from_solution(const ProblemInstance& inst, const nlohmann::json& solution,
                                 double best_known, double penalty);

std::string truncate_error(std::string text);

/// The forward pass: each (candidate, instance) pair runs in a fresh harness
/// subprocess on a bounded worker pool; results are merged in (candidate,
/// instance) order so completion order never matters. Harness failures become
/// fitness-0 records; protocol violations throw ProtocolError.
class ForwardEvaluator {
public:
    ForwardEvaluator(EvalSettings settings, const BestKnownRegistry& registry);

    struct Result {
        ExecutionTrace trace;
        FitnessVector fitness;
    };

    Result evaluate(const HeuristicIndividual& ind, std::span<const ProblemInstance> instances) const;
    std::vector<Result> evaluate_all(std::span<const HeuristicIndividual> candidates,
                                     std::span<const ProblemInstance> instances) const;

    const EvalSettings& settings() const noexcept { return settings_; }

private:
    TraceRecord evaluate_one(const HeuristicIndividual& ind, const ProblemInstance& inst,
                             std::size_t instance_index) const;

    EvalSettings settings_;
    const BestKnownRegistry& registry_;
};

/// Runs `task(i)` for i in [0, count) on up to `workers` threads. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task);

}  // namespace lago
