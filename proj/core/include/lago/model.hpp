#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lago {

/// Natural-language problem statement plus the skeleton text shown to the generator.
struct ProblemDescription {
    std::string text;
    std::string skeleton_summary;
};

enum class Operator { i1, e1, e2, m1 };

std::string_view to_string(Operator op) noexcept;
Operator operator_from_string(std::string_view s);

/// One candidate heuristic: a constructive function and a refinement (scoring) function.
struct HeuristicIndividual {
    std::string id;
    std::string cons_code;  // defines `_init_solution`
    std::string ref_code;   // defines `heuristic`
    std::string source;     // the module as generated, shown to the LLM
    std::string description;
    Operator op = Operator::i1;
    std::vector<std::string> parent_ids;
    int iteration_born = 0;
    bool parse_warning = false;  // set when the description could not be extracted

    bool operator==(const HeuristicIndividual&) const = default;
};

/// Per-training-instance fitness in [0,1], aligned with the run's canonical instance order.
class FitnessVector {
public:
    FitnessVector() = default;
    explicit FitnessVector(std::vector<double> values);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }

    bool operator==(const FitnessVector&) const = default;

private:
    std::vector<double> values_;
};

/// Arithmetic mean of the entries. Throws UsageError on an empty vector.
double mean_fitness(const FitnessVector& v);

/// Euclidean distance between two equally long fitness vectors.
double pairwise_distance(const FitnessVector& a, const FitnessVector& b);

/// Feature values of one training instance, paired with its fitness.
struct InstanceProfile {
    std::string instance_id;
    double fitness = 0.0;
    std::vector<std::optional<double>> features;

    bool operator==(const InstanceProfile&) const = default;
};

struct FeatureStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;

    bool operator==(const FeatureStats&) const = default;
};

/// Backward-pass feedback: fitness plus per-feature distribution statistics.
/// A feature whose cells were all absent has `stats[i] == std::nullopt`.
struct SemanticGradient {
    double mean_fitness = 0.0;
    std::vector<std::string> feature_names;
    std::vector<std::optional<FeatureStats>> stats;
    std::optional<InstanceProfile> best_instance;
    std::optional<InstanceProfile> worst_instance;
    std::string error_msg;

    bool has_features() const noexcept { return !feature_names.empty(); }

    bool operator==(const SemanticGradient&) const = default;
};

struct Member {
    HeuristicIndividual individual;
    FitnessVector fitness;
    SemanticGradient gradient;

    double mean() const { return mean_fitness(fitness); }

    bool operator==(const Member&) const = default;
};

struct Population {
    int iteration = 0;
    std::vector<Member> members;

    const Member* find(std::string_view id) const;
    /// Best member by mean fitness; ties go to the older, then lexicographically smaller id.
    const Member& best() const;

    bool operator==(const Population&) const = default;
};

/// Strict weak order "a ranks ahead of b": higher mean fitness, then older, then smaller id.
bool ranks_ahead(const Member& a, const Member& b);

}  // namespace lago
