#pragma once

#include <cstdint>

namespace lago {

/// Violation counts by category. TSP tours only use missing_or_duplicate_visit.
struct ViolationBreakdown {
    int missing_or_duplicate_visit = 0;
    int pair_split = 0;
    int precedence = 0;
    int time_window = 0;
    int capacity = 0;
    int fleet_size = 0;

    int total() const noexcept {
        return missing_or_duplicate_visit + pair_split + precedence + time_window + capacity +
               fleet_size;
    }

    bool operator==(const ViolationBreakdown&) const = default;
};

/// Authoritative verdict of an environment validator on one solution.
struct ValidationReport {
    bool feasible = true;
    int violation_count = 0;
    ViolationBreakdown breakdown;
    double distance = 0.0;

    bool operator==(const ValidationReport&) const = default;
};

inline ValidationReport make_report(const ViolationBreakdown& b, double distance) {
    const int n = b.total();
    return ValidationReport{n == 0, n, b, distance};
}

}  // namespace lago
