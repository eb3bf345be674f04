#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// here deliberately re-derive everything from first principles instead of
// calling into lago, so they can catch errors in the library.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "lago/pdptw.hpp"
#include "lago/rng.hpp"
#include "lago/tsp.hpp"

namespace lago::testing {

inline std::string data_dir() { return LAGO_TEST_DATA_DIR; }
inline std::string data_path(const std::string& rel) { return data_dir() + "/" + rel; }
inline std::vector<std::string> harness_command() { return {LAGO_NATIVE_HARNESS}; }

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& stem) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                (stem + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return path_.string(); }
    std::string operator/(const std::string& rel) const { return (path_ / rel).string(); }

private:
    std::filesystem::path path_;
};

// ------------------------------------------------------------------ PDPTW

/// Random instance with `requests` pickup/delivery pairs. Windows, demands and
/// capacity are drawn so that a good share of candidate solutions is feasible
/// and a good share is not.
inline pdptw::Instance random_pdptw(Rng& rng, int requests, int vehicles, const std::string& name = "rand") {
    const int capacity = 1 + static_cast<int>(rng.below(3));
    std::vector<pdptw::Node> nodes;
    nodes.push_back({0, 5.0, 5.0, 0, 0.0, 200.0, 0.0, 0, 0});
    for (int r = 0; r < requests; ++r) {
        const int p = 1 + 2 * r;
        const int d = p + 1;
        const int demand = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(capacity)));
        const double po = rng.uniform() * 20.0;
        const double pc = po + 5.0 + rng.uniform() * 40.0;
        const double dop = rng.uniform() * 30.0;
        const double dc = dop + 5.0 + rng.uniform() * 40.0;
        nodes.push_back({p, rng.uniform() * 10.0, rng.uniform() * 10.0, demand, po, pc, rng.uniform() * 2.0, 0, d});
        nodes.push_back({d, rng.uniform() * 10.0, rng.uniform() * 10.0, -demand, dop, dc, rng.uniform() * 2.0, p, 0});
    }
    return pdptw::Instance(name, vehicles, capacity, std::move(nodes));
}

struct OracleVerdict {
    bool feasible = false;
    double distance = 0.0;
};

/// Feasibility straight from the definitions: every customer exactly once,
/// pickup and delivery on one route with pickup first, load within capacity
/// at every stop, no late arrival (depot return included), and at most
/// vehicle_count non-empty routes.
inline OracleVerdict oracle_check(const pdptw::Instance& inst, const std::vector<std::vector<int>>& routes) {
    const auto& nodes = inst.nodes();
    const auto d = [&](int a, int b) {
        return std::hypot(nodes[a].x - nodes[b].x, nodes[a].y - nodes[b].y);
    };
    OracleVerdict v;
    bool ok = true;
    std::vector<int> seen(nodes.size(), 0), route_of(nodes.size(), -1), pos(nodes.size(), -1);
    int used = 0;
    for (std::size_t k = 0; k < routes.size(); ++k) {
        const auto& r = routes[k];
        if (r.empty()) continue;
        ++used;
        double t = 0.0;
        int load = 0;
        int prev = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const int n = r[i];
            ++seen[n];
            route_of[n] = static_cast<int>(k);
            pos[n] = static_cast<int>(i);
            const double arrive = t + d(prev, n);
            v.distance += d(prev, n);
            if (arrive > nodes[n].tw_close) ok = false;
            t = std::max(arrive, nodes[n].tw_open) + nodes[n].service;
            load += nodes[n].demand;
            if (load > inst.capacity()) ok = false;
            prev = n;
        }
        v.distance += d(prev, 0);
        if (t + d(prev, 0) > nodes[0].tw_close) ok = false;
    }
    for (std::size_t n = 1; n < nodes.size(); ++n)
        if (seen[n] != 1) ok = false;
    for (std::size_t n = 1; n < nodes.size(); ++n) {
        if (nodes[n].demand <= 0) continue;
        const int dl = nodes[n].delivery_partner;
        if (route_of[n] != route_of[dl] || pos[n] > pos[dl]) ok = false;
    }
    if (used > inst.vehicle_count()) ok = false;
    v.feasible = ok;
    return v;
}

/// Calls `visit(routes)` for every way of distributing the customer nodes
/// over `route_count` ordered routes, omissions included.
template <typename Visit>
void enumerate_solutions(const pdptw::Instance& inst, int route_count, Visit&& visit) {
    const int customers = static_cast<int>(inst.nodes().size()) - 1;
    // slot[c] in [0, route_count]: route index, or route_count for "omitted".
    std::vector<int> slot(static_cast<std::size_t>(customers), 0);
    const auto permute_routes = [&](auto&& self, std::vector<std::vector<int>>& routes, std::size_t k) -> void {
        if (k == routes.size()) {
            visit(routes);
            return;
        }
        std::sort(routes[k].begin(), routes[k].end());
        do {
            self(self, routes, k + 1);
        } while (std::next_permutation(routes[k].begin(), routes[k].end()));
    };
    for (;;) {
        std::vector<std::vector<int>> routes(static_cast<std::size_t>(route_count));
        for (int c = 0; c < customers; ++c)
            if (slot[c] < route_count) routes[slot[c]].push_back(c + 1);
        permute_routes(permute_routes, routes, 0);
        int i = 0;
        while (i < customers && ++slot[i] > route_count) slot[i++] = 0;
        if (i == customers) break;
    }
}

/// Minimum distance over feasible solutions using at most vehicle_count routes, if any.
inline std::optional<double> oracle_optimum(const pdptw::Instance& inst) {
    std::optional<double> best;
    enumerate_solutions(inst, inst.vehicle_count(), [&](const std::vector<std::vector<int>>& routes) {
        const auto v = oracle_check(inst, routes);
        if (v.feasible && (!best || v.distance < *best)) best = v.distance;
    });
    return best;
}

// -------------------------------------------------------------------- TSP

inline tsp::Instance random_tsp(Rng& rng, int cities, const std::string& name = "rand") {
    tsp::Instance inst;
    inst.name = name;
    for (int i = 0; i < cities; ++i)
        inst.coords.push_back({std::floor(rng.uniform() * 100.0), std::floor(rng.uniform() * 100.0)});
    return inst;
}

inline double oracle_edge(const tsp::Instance& inst, int a, int b) {
    return std::floor(std::hypot(inst.coords[a].x - inst.coords[b].x, inst.coords[a].y - inst.coords[b].y) + 0.5);
}

inline double oracle_length(const tsp::Instance& inst, const std::vector<int>& order) {
    double s = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) s += oracle_edge(inst, order[i], order[(i + 1) % order.size()]);
    return s;
}

/// Exhaustive optimum with city 0 fixed first.
inline double oracle_tsp_optimum(const tsp::Instance& inst) {
    std::vector<int> order(inst.size());
    std::iota(order.begin(), order.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        best = std::min(best, oracle_length(inst, order));
    } while (std::next_permutation(order.begin() + 1, order.end()));
    return best;
}

inline std::string tsplib_text(const tsp::Instance& inst) {
    std::string s = "NAME: " + inst.name + "\nTYPE: TSP\nDIMENSION: " + std::to_string(inst.size()) +
                    "\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n";
    for (std::size_t i = 0; i < inst.size(); ++i) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%zu %.17g %.17g\n", i + 1, inst.coords[i].x, inst.coords[i].y);
        s += buf;
    }
    return s + "EOF\n";
}

}  // namespace lago::testing
