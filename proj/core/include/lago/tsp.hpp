#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lago/validation.hpp"

namespace lago::tsp {

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

struct Instance {
    std::string name;
    std::vector<Point> coords;

    std::size_t size() const noexcept { return coords.size(); }
    /// TSPLIB EUC_2D distance: Euclidean length rounded to the nearest integer.
    double dist(std::size_t a, std::size_t b) const;

    bool operator==(const Instance&) const = default;
};

struct Tour {
    std::vector<int> order;

    bool operator==(const Tour&) const = default;
};

/// Parses a TSPLIB document with EDGE_WEIGHT_TYPE EUC_2D.
/// Throws UnsupportedFormatError for other edge-weight types, ParseError otherwise.
Instance parse_tsplib(std::string_view text);
Instance load_tsplib(const std::string& path);

/// Cyclic tour length. Throws UsageError when `tour` is not a permutation of 0..n-1.
double tour_length(const Instance& inst, const Tour& tour);

/// feasible iff the order is a permutation; one violation per city visited != 1 times
/// (out-of-range entries count one each). Distance covers the valid entries in order.
ValidationReport validate_tour(const Instance& inst, const Tour& tour);

nlohmann::json to_wire(const Instance& inst);
Instance from_wire(const nlohmann::json& doc);
nlohmann::json to_wire(const Tour& tour);
Tour tour_from_wire(const nlohmann::json& doc);

}  // namespace lago::tsp
