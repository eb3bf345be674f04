#include "lago/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lago/error.hpp"
#include "lago/format.hpp"

namespace lago {

double fitness(double best_known, double cost) {
    if (!(best_known >= 0.0) || !(cost >= 0.0))
        throw UsageError("fitness requires non-negative best-known and cost");
    if (cost == 0.0) {
        if (best_known == 0.0) return 1.0;
        throw InvariantError("cost 0 below a positive best-known cost; registry is corrupt");
    }
    return std::clamp(best_known / cost, 0.0, 1.0);
}

double internal_fitness(double best_known, std::optional<double> penalized_cost) {
    if (!penalized_cost) return 0.0;
    return fitness(best_known, *penalized_cost);
}

double qyi(double quality, double yield) {
    const double s = quality + yield;
    return s == 0.0 ? 0.0 : 2.0 * quality * yield / s;
}

BestKnownRegistry BestKnownRegistry::parse(std::string_view text) {
    std::map<std::string, double> costs;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("expected 'name<TAB>cost'", line_no);
        try {
            std::size_t used = 0;
            const std::string num = line.substr(tab + 1);
            const double c = std::stod(num, &used);
            if (used != num.size() || !(c >= 0.0)) throw std::invalid_argument("cost");
            costs[line.substr(0, tab)] = c;
        } catch (const std::exception&) {
            throw ParseError("bad cost value", line_no);
        }
    }
    return BestKnownRegistry(std::move(costs));
}

BestKnownRegistry BestKnownRegistry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open best-known registry " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string BestKnownRegistry::serialize() const {
    std::string out;
    for (const auto& [name, cost] : costs_) out += name + '\t' + format_shortest(cost) + '\n';
    return out;
}

double BestKnownRegistry::at(const std::string& instance) const {
    auto it = costs_.find(instance);
    if (it == costs_.end())
        throw ConfigError("best-known registry has no entry for instance '" + instance + "'");
    return it->second;
}

QualityYield quality_yield(std::span<const InstanceOutcome> outcomes, const BestKnownRegistry& registry) {
    if (outcomes.empty()) throw UsageError("quality_yield over zero instances");
    double quality_sum = 0.0;
    std::size_t feasible = 0;
    for (const auto& o : outcomes) {
        const double best = registry.at(o.instance);
        if (!o.feasible) continue;
        ++feasible;
        quality_sum += fitness(best, o.cost);
    }
    QualityYield qy;
    qy.yield = static_cast<double>(feasible) / static_cast<double>(outcomes.size());
    qy.quality = feasible == 0 ? 0.0 : quality_sum / static_cast<double>(feasible);
    return qy;
}

}  // namespace lago
