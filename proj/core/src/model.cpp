#include "lago/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lago/error.hpp"

namespace lago {

std::string_view to_string(Operator op) noexcept {
    switch (op) {
        case Operator::i1: return "i1";
        case Operator::e1: return "e1";
        case Operator::e2: return "e2";
        case Operator::m1: return "m1";
    }
    return "?";
}

Operator operator_from_string(std::string_view s) {
    if (s == "i1") return Operator::i1;
    if (s == "e1") return Operator::e1;
    if (s == "e2") return Operator::e2;
    if (s == "m1") return Operator::m1;
    throw ParseError("unknown operator '" + std::string(s) + "'");
}

FitnessVector::FitnessVector(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvariantError("fitness entry outside [0,1]");
    }
}

double mean_fitness(const FitnessVector& v) {
    if (v.empty()) throw UsageError("mean_fitness of an empty fitness vector");
    const auto vals = v.values();
    return std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
}

double pairwise_distance(const FitnessVector& a, const FitnessVector& b) {
    if (a.size() != b.size()) {
        throw UsageError("pairwise_distance: length mismatch (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

bool ranks_ahead(const Member& a, const Member& b) {
    const double fa = a.mean();
    const double fb = b.mean();
    if (fa != fb) return fa > fb;
    if (a.individual.iteration_born != b.individual.iteration_born)
        return a.individual.iteration_born < b.individual.iteration_born;
    return a.individual.id < b.individual.id;
}

const Member* Population::find(std::string_view id) const {
    auto it = std::find_if(members.begin(), members.end(),
                           [&](const Member& m) { return m.individual.id == id; });
    return it == members.end() ? nullptr : &*it;
}

const Member& Population::best() const {
    if (members.empty()) throw UsageError("best() of an empty population");
    return *std::min_element(members.begin(), members.end(), ranks_ahead);
}

}  // namespace lago
