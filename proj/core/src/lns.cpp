#include "lago/lns.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "lago/error.hpp"

namespace lago::lns {

namespace {

constexpr double kImprovementEps = 1e-9;
constexpr double kTimeEps = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_score_count(std::size_t got, std::size_t expected) {
    if (got != expected)
        throw UsageError("heuristic returned " + std::to_string(got) + " scores, expected " +
                         std::to_string(expected) + " (one per decision variable)");
}

}  // namespace

std::size_t neighborhood_size(std::size_t variable_count) {
    const auto q = static_cast<std::size_t>(std::lround(0.15 * static_cast<double>(variable_count)));
    return std::min({std::max<std::size_t>(2, q), std::size_t{25}, variable_count});
}

std::vector<std::size_t> sample_neighborhood(std::span<const double> scores, std::size_t q, Rng& rng) {
    std::vector<double> w(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double s = std::isfinite(scores[i]) ? scores[i] : 0.0;
        w[i] = std::max(s, 0.0) + 1e-9;
    }
    std::vector<std::size_t> picked;
    q = std::min(q, w.size());
    picked.reserve(q);
    for (std::size_t k = 0; k < q; ++k) {
        const std::size_t i = rng.weighted(w);
        picked.push_back(i);
        w[i] = 0.0;
    }
    return picked;
}

namespace pd {

double route_cost(const pdptw::Instance& inst, const pdptw::Route& route, double penalty) {
    if (route.empty()) return 0.0;
    double distance = 0.0;
    int violations = 0;
    double t = 0.0;
    int load = 0;
    int prev = 0;
    std::vector<int> seen_pickup;
    for (int id : route) {
        const pdptw::Node& v = inst.node(id);
        const double leg = inst.dist(prev, id);
        distance += leg;
        if (t + leg > v.tw_close + kTimeEps) ++violations;
        t = std::max(t + leg, v.tw_open) + v.service;
        load += v.demand;
        if (load > inst.capacity()) ++violations;
        if (v.pickup_partner != 0) {
            // Delivery: a violation if its pickup appears later in this route.
            const bool pickup_before =
                std::find(seen_pickup.begin(), seen_pickup.end(), v.pickup_partner) != seen_pickup.end();
            if (!pickup_before &&
                std::find(route.begin(), route.end(), v.pickup_partner) != route.end())
                ++violations;
        } else {
            seen_pickup.push_back(id);
        }
        prev = id;
    }
    const double back = inst.dist(prev, 0);
    distance += back;
    if (t + back > inst.depot().tw_close + kTimeEps) ++violations;
    return distance + penalty * violations;
}

void remove_requests(const pdptw::Instance& inst, pdptw::Solution& sol, std::span<const int> requests) {
    std::vector<char> drop(inst.nodes().size(), 0);
    for (int r : requests) {
        const auto& req = inst.requests().at(static_cast<std::size_t>(r));
        drop[static_cast<std::size_t>(req.pickup)] = 1;
        drop[static_cast<std::size_t>(req.delivery)] = 1;
    }
    for (auto& route : sol.routes)
        std::erase_if(route, [&](int id) { return drop[static_cast<std::size_t>(id)] != 0; });
    std::erase_if(sol.routes, [](const pdptw::Route& r) { return r.empty(); });
}

void insert_request(const pdptw::Instance& inst, pdptw::Solution& sol, int request, double penalty) {
    const auto& req = inst.requests().at(static_cast<std::size_t>(request));
    const int used = static_cast<int>(std::count_if(sol.routes.begin(), sol.routes.end(),
                                                    [](const auto& r) { return !r.empty(); }));

    double best_delta = route_cost(inst, {req.pickup, req.delivery}, penalty) +
                        (used >= inst.vehicle_count() ? penalty : 0.0);
    std::size_t best_route = sol.routes.size();
    std::size_t best_i = 0;
    std::size_t best_j = 0;

    pdptw::Route candidate;
    for (std::size_t r = 0; r < sol.routes.size(); ++r) {
        const auto& route = sol.routes[r];
        if (route.empty()) continue;
        const double base = route_cost(inst, route, penalty);
        for (std::size_t i = 0; i <= route.size(); ++i) {
            for (std::size_t j = i; j <= route.size(); ++j) {
                candidate.clear();
                candidate.insert(candidate.end(), route.begin(), route.begin() + static_cast<long>(i));
                candidate.push_back(req.pickup);
                candidate.insert(candidate.end(), route.begin() + static_cast<long>(i),
                                 route.begin() + static_cast<long>(j));
                candidate.push_back(req.delivery);
                candidate.insert(candidate.end(), route.begin() + static_cast<long>(j), route.end());
                const double delta = route_cost(inst, candidate, penalty) - base;
                if (delta < best_delta) {
                    best_delta = delta;
                    best_route = r;
                    best_i = i;
                    best_j = j;
                }
            }
        }
    }

    if (best_route == sol.routes.size()) {
        sol.routes.push_back({req.pickup, req.delivery});
        return;
    }
    auto& route = sol.routes[best_route];
    route.insert(route.begin() + static_cast<long>(best_j), req.delivery);
    route.insert(route.begin() + static_cast<long>(best_i), req.pickup);
}

Outcome<pdptw::Solution> search(const pdptw::Instance& inst, const Construct& construct,
                                const Score& score, const Budget& budget, double penalty) {
    const auto start = Clock::now();
    Rng rng(budget.seed);
    Outcome<pdptw::Solution> out;
    out.best = construct(inst);
    out.best_cost = pdptw::penalized_cost(inst, out.best, penalty);

    const std::size_t n = inst.requests().size();
    const std::size_t q = neighborhood_size(n);
    for (int it = 0; it < budget.iterations; ++it) {
        if (seconds_since(start) >= budget.time_limit_s) {
            out.hit_time_limit = true;
            break;
        }
        if (n == 0) {
            out.iterations_done = budget.iterations;
            break;
        }
        const std::vector<double> scores = score(inst, out.best);
        check_score_count(scores.size(), n);
        const auto picked = sample_neighborhood(scores, q, rng);
        std::vector<int> requests(picked.begin(), picked.end());

        pdptw::Solution candidate = out.best;
        remove_requests(inst, candidate, requests);
        for (int r : requests) insert_request(inst, candidate, r, penalty);
        const double cost = pdptw::penalized_cost(inst, candidate, penalty);
        if (cost < out.best_cost - kImprovementEps) {
            out.best = std::move(candidate);
            out.best_cost = cost;
        }
        ++out.iterations_done;
    }
    return out;
}

pdptw::Solution construct_cheapest_insertion(const pdptw::Instance& inst, double penalty) {
    std::vector<int> order(inst.requests().size());
    for (std::size_t r = 0; r < order.size(); ++r) order[r] = static_cast<int>(r);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& ra = inst.requests()[static_cast<std::size_t>(a)];
        const auto& rb = inst.requests()[static_cast<std::size_t>(b)];
        return inst.node(ra.pickup).tw_open < inst.node(rb.pickup).tw_open;
    });
    pdptw::Solution sol;
    for (int r : order) insert_request(inst, sol, r, penalty);
    return sol;
}

pdptw::Solution construct_route_per_request(const pdptw::Instance& inst) {
    pdptw::Solution sol;
    for (const auto& req : inst.requests()) sol.routes.push_back({req.pickup, req.delivery});
    return sol;
}

std::vector<double> score_removal_gain(const pdptw::Instance& inst, const pdptw::Solution& sol,
                                       double penalty) {
    std::vector<double> scores(inst.requests().size(), 0.0);
    std::vector<double> route_costs;
    route_costs.reserve(sol.routes.size());
    for (const auto& route : sol.routes) route_costs.push_back(route_cost(inst, route, penalty));

    for (std::size_t r = 0; r < scores.size(); ++r) {
        const auto& req = inst.requests()[r];
        bool present = false;
        double gain = 0.0;
        for (std::size_t k = 0; k < sol.routes.size(); ++k) {
            const auto& route = sol.routes[k];
            if (std::find(route.begin(), route.end(), req.pickup) == route.end() &&
                std::find(route.begin(), route.end(), req.delivery) == route.end())
                continue;
            present = true;
            pdptw::Route without;
            for (int id : route)
                if (id != req.pickup && id != req.delivery) without.push_back(id);
            gain += route_costs[k] - route_cost(inst, without, penalty);
        }
        scores[r] = present ? gain : 2.0 * penalty;
    }
    return scores;
}

std::vector<double> score_uniform(const pdptw::Instance& inst, const pdptw::Solution&) {
    return std::vector<double>(inst.requests().size(), 1.0);
}

std::vector<double> score_window_tightness(const pdptw::Instance& inst, const pdptw::Solution&) {
    std::vector<double> scores;
    scores.reserve(inst.requests().size());
    const double horizon = std::max(1.0, inst.depot().tw_close - inst.depot().tw_open);
    for (const auto& req : inst.requests()) {
        const auto& p = inst.node(req.pickup);
        const auto& d = inst.node(req.delivery);
        const double width = (p.tw_close - p.tw_open) + (d.tw_close - d.tw_open);
        scores.push_back(1.0 - std::min(1.0, width / (2.0 * horizon)));
    }
    return scores;
}

}  // namespace pd

namespace ts {

double penalized_length(const tsp::Instance& inst, const tsp::Tour& tour, double penalty) {
    const auto r = tsp::validate_tour(inst, tour);
    return r.distance + penalty * r.violation_count;
}

void remove_cities(tsp::Tour& tour, std::span<const int> cities) {
    std::erase_if(tour.order, [&](int c) {
        return std::find(cities.begin(), cities.end(), c) != cities.end();
    });
}

void insert_city(const tsp::Instance& inst, tsp::Tour& tour, int city) {
    auto& o = tour.order;
    if (o.empty()) {
        o.push_back(city);
        return;
    }
    const auto c = static_cast<std::size_t>(city);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_pos = o.size();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const auto a = static_cast<std::size_t>(o[i]);
        const auto b = static_cast<std::size_t>(o[(i + 1) % o.size()]);
        const double delta = inst.dist(a, c) + inst.dist(c, b) - (o.size() > 1 ? inst.dist(a, b) : 0.0);
        if (delta < best) {
            best = delta;
            best_pos = i + 1;
        }
    }
    o.insert(o.begin() + static_cast<long>(best_pos), city);
}

Outcome<tsp::Tour> search(const tsp::Instance& inst, const Construct& construct, const Score& score,
                          const Budget& budget, double penalty) {
    const auto start = Clock::now();
    Rng rng(budget.seed);
    Outcome<tsp::Tour> out;
    out.best = construct(inst);
    out.best_cost = penalized_length(inst, out.best, penalty);

    const std::size_t n = inst.size();
    const std::size_t q = neighborhood_size(n);
    for (int it = 0; it < budget.iterations; ++it) {
        if (seconds_since(start) >= budget.time_limit_s) {
            out.hit_time_limit = true;
            break;
        }
        const std::vector<double> scores = score(inst, out.best);
        check_score_count(scores.size(), n);
        const auto picked = sample_neighborhood(scores, q, rng);
        std::vector<int> cities(picked.begin(), picked.end());

        tsp::Tour candidate = out.best;
        remove_cities(candidate, cities);
        for (int c : cities) insert_city(inst, candidate, c);
        const double cost = penalized_length(inst, candidate, penalty);
        if (cost < out.best_cost - kImprovementEps) {
            out.best = std::move(candidate);
            out.best_cost = cost;
        }
        ++out.iterations_done;
    }
    return out;
}

tsp::Tour construct_nearest_neighbor(const tsp::Instance& inst) {
    const std::size_t n = inst.size();
    std::vector<char> used(n, 0);
    tsp::Tour tour;
    std::size_t cur = 0;
    used[0] = 1;
    tour.order.push_back(0);
    for (std::size_t k = 1; k < n; ++k) {
        std::size_t next = n;
        for (std::size_t c = 0; c < n; ++c)
            if (!used[c] && (next == n || inst.dist(cur, c) < inst.dist(cur, next))) next = c;
        used[next] = 1;
        tour.order.push_back(static_cast<int>(next));
        cur = next;
    }
    return tour;
}

tsp::Tour construct_identity(const tsp::Instance& inst) {
    tsp::Tour tour;
    for (std::size_t c = 0; c < inst.size(); ++c) tour.order.push_back(static_cast<int>(c));
    return tour;
}

std::vector<double> score_removal_gain(const tsp::Instance& inst, const tsp::Tour& tour) {
    std::vector<double> scores(inst.size(), 0.0);
    const auto& o = tour.order;
    const std::size_t m = o.size();
    for (std::size_t i = 0; i < m; ++i) {
        const int c = o[i];
        if (c < 0 || static_cast<std::size_t>(c) >= inst.size() || m < 3) continue;
        const auto a = static_cast<std::size_t>(o[(i + m - 1) % m]);
        const auto b = static_cast<std::size_t>(o[(i + 1) % m]);
        const auto cc = static_cast<std::size_t>(c);
        scores[cc] = inst.dist(a, cc) + inst.dist(cc, b) - inst.dist(a, b);
    }
    return scores;
}

std::vector<double> score_uniform(const tsp::Instance& inst, const tsp::Tour&) {
    return std::vector<double>(inst.size(), 1.0);
}

}  // namespace ts

}  // namespace lago::lns
