#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lago/validation.hpp"

namespace lago::pdptw {

inline constexpr double kDefaultPenalty = 1e5;

struct Node {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    int demand = 0;
    double tw_open = 0.0;
    double tw_close = 0.0;
    double service = 0.0;
    int pickup_partner = 0;    // set on delivery nodes
    int delivery_partner = 0;  // set on pickup nodes

    bool operator==(const Node&) const = default;
};

struct Request {
    int pickup = 0;
    int delivery = 0;

    bool operator==(const Request&) const = default;
};

/// Immutable PDPTW instance. Node 0 is the depot; every other node belongs
/// to exactly one pickup/delivery request.
class Instance {
public:
    Instance(std::string name, int vehicle_count, int capacity, std::vector<Node> nodes);

    const std::string& name() const noexcept { return name_; }
    int vehicle_count() const noexcept { return vehicle_count_; }
    int capacity() const noexcept { return capacity_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    const Node& depot() const { return nodes_.front(); }
    /// Requests ordered by pickup node id; the decision variables of the LNS skeleton.
    const std::vector<Request>& requests() const noexcept { return requests_; }
    /// Index into requests() for any non-depot node.
    int request_of(int node_id) const { return request_of_.at(static_cast<std::size_t>(node_id)); }

    double dist(int a, int b) const;

    bool operator==(const Instance& o) const {
        return name_ == o.name_ && vehicle_count_ == o.vehicle_count_ &&
               capacity_ == o.capacity_ && nodes_ == o.nodes_;
    }

private:
    std::string name_;
    int vehicle_count_;
    int capacity_;
    std::vector<Node> nodes_;
    std::vector<Request> requests_;
    std::vector<int> request_of_;
};

using Route = std::vector<int>;

/// Routes of non-depot node ids; the depot start and end are implicit.
struct Solution {
    std::vector<Route> routes;

    bool operator==(const Solution&) const = default;
};

/// Parses the Li&Lim-style text layout:
///   vehicle_count capacity speed
///   id x y demand tw_open tw_close service pickup_idx delivery_idx   (one per node, depot first)
/// Throws ParseError naming the offending line.
Instance parse_instance(std::string_view text, std::string name = "");
Instance load_instance(const std::string& path);

/// Simulates every route from the depot at t=0. Waiting for tw_open is free;
/// arriving after tw_close (including the return to the depot) is one
/// time-window violation. Empty routes are unused vehicles.
/// Throws UsageError for node ids outside 1..n-1.
ValidationReport validate(const Instance& inst, const Solution& sol);

/// distance + penalty * violation_count.
double penalized_cost(const Instance& inst, const Solution& sol, double penalty = kDefaultPenalty);

/// Sandbox wire document: nodes, capacity, vehicle_count and the request pair list.
nlohmann::json to_wire(const Instance& inst);
Instance from_wire(const nlohmann::json& doc);

nlohmann::json to_wire(const Solution& sol);
Solution solution_from_wire(const nlohmann::json& doc);

}  // namespace lago::pdptw
