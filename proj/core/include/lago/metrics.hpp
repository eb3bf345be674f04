#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

namespace lago {

/// min(1, best_known / cost), 1 when both are zero.
/// Throws UsageError on negative inputs and InvariantError when cost == 0 < best_known.
double fitness(double best_known, double cost);

/// Training fitness: fitness of the penalized cost, so violations act only
/// through the penalty. An absent solution scores 0.
double internal_fitness(double best_known, std::optional<double> penalized_cost);

/// Harmonic mean 2qy/(q+y); 0 when q + y == 0.
double qyi(double quality, double yield);

struct QualityYield {
    double quality = 0.0;
    double yield = 0.0;

    double index() const { return qyi(quality, yield); }
};

/// Best-known costs keyed by instance name, read from `name<TAB>cost` lines.
class BestKnownRegistry {
public:
    BestKnownRegistry() = default;
    explicit BestKnownRegistry(std::map<std::string, double> costs) : costs_(std::move(costs)) {}

    static BestKnownRegistry load(const std::string& path);
    static BestKnownRegistry parse(std::string_view text);
    std::string serialize() const;

    /// Throws ConfigError naming the instance when it is not registered.
    double at(const std::string& instance) const;
    bool contains(const std::string& instance) const { return costs_.count(instance) != 0; }
    void set(const std::string& instance, double cost) { costs_[instance] = cost; }
    const std::map<std::string, double>& entries() const noexcept { return costs_; }

private:
    std::map<std::string, double> costs_;
};

struct InstanceOutcome {
    std::string instance;
    bool feasible = false;
    double cost = 0.0;  // raw objective, meaningful only when feasible
};

/// yield = feasible / total; quality = mean of min(1, c*/c) over feasible instances
/// (0 when none is feasible). Every instance must be registered.
QualityYield quality_yield(std::span<const InstanceOutcome> outcomes, const BestKnownRegistry& registry);

}  // namespace lago
