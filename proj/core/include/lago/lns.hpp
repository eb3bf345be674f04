#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lago/pdptw.hpp"
#include "lago/rng.hpp"
#include "lago/tsp.hpp"

// Native large neighborhood search skeleton. It mirrors the skeleton the
// sandbox harness hosts for generated code: construct, then repeatedly score
// the decision variables, sample a neighborhood proportionally to the scores,
// destroy it, repair by cheapest insertion under penalized cost, and accept
// strict improvements only.
namespace lago::lns {

struct Budget {
    int iterations = 200;
    double time_limit_s = 10.0;
    std::uint64_t seed = 0;
};

template <typename Solution>
struct Outcome {
    Solution best;
    double best_cost = 0.0;
    int iterations_done = 0;
    /// The time limit expired before the requested iterations completed.
    bool hit_time_limit = false;
};

/// max(2, round(0.15 * n)) capped at 25 and at n.
std::size_t neighborhood_size(std::size_t variable_count);

/// Draws q distinct indices, each draw proportional to max(score, 0) + 1e-9.
/// Non-finite scores are treated as 0.
std::vector<std::size_t> sample_neighborhood(std::span<const double> scores, std::size_t q, Rng& rng);

namespace pd {

using Construct = std::function<pdptw::Solution(const pdptw::Instance&)>;
using Score = std::function<std::vector<double>(const pdptw::Instance&, const pdptw::Solution&)>;

/// distance + penalty * (time-window + capacity + precedence violations) of one route.
double route_cost(const pdptw::Instance& inst, const pdptw::Route& route, double penalty);

/// Removes every occurrence of the listed requests' nodes; drops emptied routes.
void remove_requests(const pdptw::Instance& inst, pdptw::Solution& sol, std::span<const int> requests);

/// Inserts one request at its cheapest (route, pickup slot, delivery slot),
/// opening a new route when that is cheaper (fleet overflow priced at `penalty`).
void insert_request(const pdptw::Instance& inst, pdptw::Solution& sol, int request, double penalty);

/// Throws UsageError if `score` returns the wrong number of values.
Outcome<pdptw::Solution> search(const pdptw::Instance& inst, const Construct& construct,
                                const Score& score, const Budget& budget, double penalty);

// Built-in heuristics.
pdptw::Solution construct_cheapest_insertion(const pdptw::Instance& inst, double penalty);
pdptw::Solution construct_route_per_request(const pdptw::Instance& inst);
/// Penalized cost saved by removing each request from its route.
std::vector<double> score_removal_gain(const pdptw::Instance& inst, const pdptw::Solution& sol,
                                       double penalty);
std::vector<double> score_uniform(const pdptw::Instance& inst, const pdptw::Solution& sol);
/// Tightness of each request's time windows (narrower windows score higher).
std::vector<double> score_window_tightness(const pdptw::Instance& inst, const pdptw::Solution& sol);

}  // namespace pd

namespace ts {

using Construct = std::function<tsp::Tour(const tsp::Instance&)>;
using Score = std::function<std::vector<double>(const tsp::Instance&, const tsp::Tour&)>;

double penalized_length(const tsp::Instance& inst, const tsp::Tour& tour, double penalty);
void remove_cities(tsp::Tour& tour, std::span<const int> cities);
void insert_city(const tsp::Instance& inst, tsp::Tour& tour, int city);

Outcome<tsp::Tour> search(const tsp::Instance& inst, const Construct& construct, const Score& score,
                          const Budget& budget, double penalty);

tsp::Tour construct_nearest_neighbor(const tsp::Instance& inst);
tsp::Tour construct_identity(const tsp::Instance& inst);
/// Detour saved by removing each city: d(prev,c) + d(c,next) - d(prev,next).
std::vector<double> score_removal_gain(const tsp::Instance& inst, const tsp::Tour& tour);
std::vector<double> score_uniform(const tsp::Instance& inst, const tsp::Tour& tour);

}  // namespace ts

}  // namespace lago::lns
