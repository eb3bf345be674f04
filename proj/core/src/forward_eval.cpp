#include "lago/forward_eval.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "lago/error.hpp"
#include "lago/rng.hpp"
#include "lago/sandbox.hpp"

namespace lago {

void EvalBudget::check() const {
    if (lns_iterations <= 0) throw ConfigError("eval budget: lns_iterations must be positive");
    if (!(time_limit_s > 0.0)) throw ConfigError("eval budget: time_limit_s must be positive");
}

std::string ExecutionTrace::first_error() const {
    for (const auto& r : records)
        if (!r.error_text.empty()) return r.error_text;
    return {};
}

std::vector<InstanceOutcome> ExecutionTrace::outcomes() const {
    std::vector<InstanceOutcome> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back({r.instance, r.feasible, r.raw_cost});
    return out;
}

std::string truncate_error(std::string text) {
    if (text.size() > kMaxErrorText) text.resize(kMaxErrorText);
    return text;
}

TraceRecord record_from_solution(const ProblemInstance& inst, const nlohmann::json& solution,
                                 double best_known, double penalty) {
    TraceRecord rec;
    rec.instance = inst.name();
    ValidationReport report;
    try {
        report = inst.validate(solution);
    } catch (const Error& e) {
        rec.error_text = truncate_error(std::string("solution rejected by validator: ") + e.what());
        return rec;
    }
    rec.solution = solution;
    rec.raw_cost = report.distance;
    rec.violation_count = report.violation_count;
    rec.breakdown = report.breakdown;
    rec.feasible = report.feasible;
    rec.penalized_cost = inst.penalized(report, penalty);
    rec.internal_fitness = internal_fitness(best_known, rec.penalized_cost);
    return rec;
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task) {
    const std::size_t n_threads = std::min<std::size_t>(std::max(1u, workers), count);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::atomic<bool> stop{false};
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count && !stop; i = next++) {
                    try {
                        task(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        stop = true;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

ForwardEvaluator::ForwardEvaluator(EvalSettings settings, const BestKnownRegistry& registry)
    : settings_(std::move(settings)), registry_(registry) {
    settings_.budget.check();
    if (!(settings_.penalty > 0.0)) throw ConfigError("penalty must be positive");
}

TraceRecord ForwardEvaluator::evaluate_one(const HeuristicIndividual& ind, const ProblemInstance& inst,
                                           std::size_t instance_index) const {
    const double best_known = registry_.at(inst.name());
    sandbox::EvaluateRequest req;
    req.env = inst.env();
    req.instance = inst.to_wire();
    req.cons_code = ind.cons_code;
    req.ref_code = ind.ref_code;
    req.iterations = settings_.budget.lns_iterations;
    req.time_limit_s = settings_.budget.time_limit_s;
    // Same stream per instance for every candidate, so candidates face identical randomness.
    req.seed = derive_seed(settings_.budget.seed, "lns", instance_index);

    const auto start = std::chrono::steady_clock::now();
    sandbox::Client client(settings_.harness_command);
    sandbox::EvaluateReply reply;
    try {
        reply = client.evaluate(req);
    } catch (const ProtocolError&) {
        throw;
    } catch (const Error& e) {
        reply.outcome = sandbox::Outcome::crash;
        reply.traceback = e.what();
    }
    client.shutdown();
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    TraceRecord rec;
    if (reply.outcome == sandbox::Outcome::ok) {
        rec = record_from_solution(inst, reply.solution, best_known, settings_.penalty);
    } else {
        rec.instance = inst.name();
        rec.timed_out = reply.outcome == sandbox::Outcome::timeout;
        std::string text = std::string(sandbox::to_string(reply.outcome)) + " error";
        if (!reply.traceback.empty()) text += ": " + reply.traceback;
        rec.error_text = truncate_error(std::move(text));
    }
    rec.wall_time = elapsed;
    rec.lns_iterations = reply.iterations_done;
    return rec;
}

ForwardEvaluator::Result ForwardEvaluator::evaluate(const HeuristicIndividual& ind,
                                                    std::span<const ProblemInstance> instances) const {
    auto all = evaluate_all(std::span<const HeuristicIndividual>(&ind, 1), instances);
    return std::move(all.front());
}

std::vector<ForwardEvaluator::Result> ForwardEvaluator::evaluate_all(
    std::span<const HeuristicIndividual> candidates, std::span<const ProblemInstance> instances) const {
    if (instances.empty()) throw UsageError("forward pass over zero instances");
    // Registry gaps are configuration errors; surface them before spawning anything.
    for (const auto& inst : instances) (void)registry_.at(inst.name());

    const std::size_t k = instances.size();
    std::vector<TraceRecord> records(candidates.size() * k);
    parallel_for(records.size(), settings_.workers, [&](std::size_t task) {
        records[task] = evaluate_one(candidates[task / k], instances[task % k], task % k);
    });

    std::vector<Result> out;
    out.reserve(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        Result r;
        r.trace.individual_id = candidates[c].id;
        std::vector<double> fv;
        for (std::size_t i = 0; i < k; ++i) {
            fv.push_back(records[c * k + i].internal_fitness);
            r.trace.records.push_back(std::move(records[c * k + i]));
        }
        r.fitness = FitnessVector(std::move(fv));
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace lago
