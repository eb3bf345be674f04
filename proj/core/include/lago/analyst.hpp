#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lago/environment.hpp"
#include "lago/forward_eval.hpp"
#include "lago/llm.hpp"
#include "lago/model.hpp"

namespace lago {

enum class FeatureStatus { active, failed, repaired };

std::string_view to_string(FeatureStatus s) noexcept;
FeatureStatus feature_status_from_string(std::string_view s);

/// LLM-written feature functions, aggregated in `feature_func_list`.
struct FeatureSet {
    std::string source;
    std::vector<std::string> names;
    int iteration = 0;
    FeatureStatus status = FeatureStatus::active;

    bool operator==(const FeatureSet&) const = default;
};

/// Parses analyst output. Returns nullopt (with the reason in `why`) when the
/// code has no `feature_func_list = [...]` or it names 0 or more than
/// `max_features` functions.
std::optional<FeatureSet> parse_feature_code(std::string_view response, int max_features,
                                             std::string* why = nullptr);

/// One feature value; absent values carry a reason code
/// ("no_solution", "error", "non_finite", "missing", "timeout", "crash").
struct FeatureCell {
    std::optional<double> value;
    std::string absent_reason;
};

struct FeatureMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<FeatureCell>> rows;  // one per (instance, solution) pair
    bool whole_set_failed = false;
    std::string first_traceback;

    /// Whole-set failure, or some feature errored on every pair it was tried on.
    bool needs_repair() const;
};

struct FeaturePair {
    const ProblemInstance* instance = nullptr;
    std::optional<nlohmann::json> solution;
};

struct AnalystSettings {
    int max_features = 8;
    double feature_timeout_s = 2.0;
    int max_retries = 2;
    int max_repairs = 2;
    unsigned workers = 1;
    std::vector<std::string> harness_command;
};

/// The backward pass: asks the LLM for feature functions, runs them in the
/// sandbox over (instance, solution) pairs, and repairs or reverts failing sets.
class Analyst {
public:
    Analyst(llm::Gateway& gateway, ProblemDescription desc, std::string template_analyst_code,
            AnalystSettings settings);

    std::vector<llm::Message> propose_messages(const FeatureSet* previous, const SemanticGradient& best,
                                               std::span<const double> best_costs, bool improved) const;
    std::vector<llm::Message> repair_messages(const FeatureSet& fs, const std::string& traceback) const;

    /// nullopt when no parseable code arrived after the retries (analyst unavailable).
    std::optional<FeatureSet> propose_features(int iteration, const FeatureSet* previous,
                                               const SemanticGradient& best, std::span<const double> best_costs,
                                               bool improved, std::vector<std::string>* events = nullptr);

    /// One repair request for a failed set. Throws UsageError for a non-failed
    /// set or an empty traceback; nullopt when the reply does not parse.
    std::optional<FeatureSet> repair_features(int iteration, int round, const FeatureSet& fs,
                                              const std::string& traceback,
                                              std::vector<std::string>* events = nullptr);

    /// Runs every function of `fs` on every pair in the sandbox.
    FeatureMatrix run_features(const FeatureSet& fs, std::span<const FeaturePair> pairs) const;

    struct Analysis {
        std::optional<FeatureSet> features;   // the set actually used, if any
        std::vector<FeatureMatrix> matrices;  // one per group, empty without features
    };

    /// Full lifecycle for one iteration: propose, run, repair up to
    /// `max_repairs` times, else revert to `previous`, else no features.
    Analysis analyze(int iteration, const FeatureSet* previous, const SemanticGradient& best,
                     std::span<const double> best_costs, bool improved,
                     std::span<const std::vector<FeaturePair>> groups, std::vector<std::string>* events = nullptr);

    const AnalystSettings& settings() const noexcept { return settings_; }

private:
    std::optional<FeatureSet> ask(const std::string& base_tag, int attempts, const std::vector<llm::Message>& messages,
                                  int iteration, FeatureStatus status, std::vector<std::string>* events);

    llm::Gateway& gateway_;
    ProblemDescription desc_;
    std::string template_analyst_code_;
    AnalystSettings settings_;
};

/// Fitness mean, per-feature range and mean over finite cells, and the feature
/// rows of the best and worst instances (ties to the lower index). `fm` may be
/// null, giving a fitness-only gradient.
SemanticGradient assemble_gradient(const FitnessVector& fv, const FeatureMatrix* fm, const ExecutionTrace& trace);

/// Feature lines plus the worst/best instance lines of an individual's summary.
std::string render_performance_summary(const SemanticGradient& g);

/// The individual block shown to the generator (numbers to 4 significant digits).
std::string render_individual(const HeuristicIndividual& ind, const SemanticGradient& g, double avg_objective);

}  // namespace lago
