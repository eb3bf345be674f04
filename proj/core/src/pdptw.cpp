#include "lago/pdptw.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lago/error.hpp"

namespace lago::pdptw {

namespace {

constexpr double kTimeEps = 1e-9;

std::vector<std::pair<std::size_t, std::string>> content_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        ++line_no;
        std::string line(text.substr(pos, end - pos));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") != std::string::npos) out.emplace_back(line_no, line);
        if (end == text.size()) break;
        pos = end + 1;
    }
    return out;
}

template <typename... Ts>
bool read_fields(const std::string& line, Ts&... fields) {
    std::istringstream in(line);
    (in >> ... >> fields);
    if (!in) return false;
    std::string extra;
    return !(in >> extra);
}

}  // namespace

Instance::Instance(std::string name, int vehicle_count, int capacity, std::vector<Node> nodes)
    : name_(std::move(name)),
      vehicle_count_(vehicle_count),
      capacity_(capacity),
      nodes_(std::move(nodes)) {
    if (vehicle_count_ <= 0) throw InvariantError("vehicle_count must be positive");
    if (capacity_ <= 0) throw InvariantError("capacity must be positive");
    if (nodes_.empty()) throw InvariantError("instance has no depot");
    const Node& d = nodes_.front();
    if (d.demand != 0 || d.pickup_partner != 0 || d.delivery_partner != 0)
        throw InvariantError("depot must have zero demand and no partners");

    const int n = static_cast<int>(nodes_.size());
    request_of_.assign(nodes_.size(), -1);
    for (int i = 0; i < n; ++i) {
        const Node& v = nodes_[static_cast<std::size_t>(i)];
        if (v.id != i) throw InvariantError("node ids must be 0..n-1 in order");
        if (v.tw_open > v.tw_close)
            throw InvariantError("node " + std::to_string(i) + ": tw_open > tw_close");
        if (i == 0) continue;
        const bool is_pickup = v.delivery_partner != 0;
        const bool is_delivery = v.pickup_partner != 0;
        if (is_pickup == is_delivery)
            throw InvariantError("node " + std::to_string(i) +
                                 " must have exactly one of pickup/delivery partner");
        const int partner = is_pickup ? v.delivery_partner : v.pickup_partner;
        if (partner <= 0 || partner >= n)
            throw InvariantError("node " + std::to_string(i) + " has partner out of range");
        const Node& p = nodes_[static_cast<std::size_t>(partner)];
        const int back = is_pickup ? p.pickup_partner : p.delivery_partner;
        if (back != i)
            throw InvariantError("broken pairing between nodes " + std::to_string(i) + " and " +
                                 std::to_string(partner));
        if (is_pickup) {
            if (v.demand < 0 || p.demand != -v.demand)
                throw InvariantError("request " + std::to_string(i) + "->" +
                                     std::to_string(partner) + " has mismatched demands");
            request_of_[static_cast<std::size_t>(i)] = static_cast<int>(requests_.size());
            request_of_[static_cast<std::size_t>(partner)] = static_cast<int>(requests_.size());
            requests_.push_back({i, partner});
        }
    }
}

double Instance::dist(int a, int b) const {
    const Node& p = nodes_[static_cast<std::size_t>(a)];
    const Node& q = nodes_[static_cast<std::size_t>(b)];
    return std::hypot(p.x - q.x, p.y - q.y);
}

Instance parse_instance(std::string_view text, std::string name) {
    const auto lines = content_lines(text);
    if (lines.empty()) throw ParseError("empty instance document", 1);

    int vehicles = 0;
    int capacity = 0;
    double speed = 0.0;
    if (!read_fields(lines[0].second, vehicles, capacity, speed))
        throw ParseError("expected header 'vehicle_count capacity speed'", lines[0].first);
    if (vehicles <= 0) throw ParseError("vehicle_count must be positive", lines[0].first);
    if (capacity <= 0) throw ParseError("capacity must be positive", lines[0].first);

    std::vector<Node> nodes;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto& [line_no, line] = lines[k];
        Node v;
        if (!read_fields(line, v.id, v.x, v.y, v.demand, v.tw_open, v.tw_close, v.service,
                         v.pickup_partner, v.delivery_partner))
            throw ParseError("expected 'id x y demand tw_open tw_close service pickup delivery'",
                             line_no);
        if (v.id != static_cast<int>(nodes.size()))
            throw ParseError("node id " + std::to_string(v.id) + " out of sequence", line_no);
        if (v.tw_open > v.tw_close) throw ParseError("tw_open > tw_close", line_no);
        nodes.push_back(v);
    }
    if (nodes.empty()) throw ParseError("missing depot line", lines[0].first + 1);

    // Re-check the pairing here so the error can name the line of the first broken node.
    const int n = static_cast<int>(nodes.size());
    for (int i = 1; i < n; ++i) {
        const Node& v = nodes[static_cast<std::size_t>(i)];
        const std::size_t line_no = lines[static_cast<std::size_t>(i) + 1].first;
        const bool is_pickup = v.delivery_partner != 0;
        const bool is_delivery = v.pickup_partner != 0;
        const int partner = is_pickup ? v.delivery_partner : v.pickup_partner;
        if (is_pickup == is_delivery || partner <= 0 || partner >= n)
            throw ParseError("broken pairing for node " + std::to_string(i), line_no);
        const Node& p = nodes[static_cast<std::size_t>(partner)];
        if ((is_pickup ? p.pickup_partner : p.delivery_partner) != i)
            throw ParseError("broken pairing for node " + std::to_string(i), line_no);
        if (p.demand != -v.demand)
            throw ParseError("pair demands do not cancel for node " + std::to_string(i), line_no);
    }
    try {
        return Instance(std::move(name), vehicles, capacity, std::move(nodes));
    } catch (const InvariantError& e) {
        throw ParseError(e.what(), lines[1].first);
    }
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open instance file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string stem = path.substr(path.find_last_of('/') + 1);
    stem = stem.substr(0, stem.find_last_of('.'));
    try {
        return parse_instance(buf.str(), stem);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), e.line());
    }
}

ValidationReport validate(const Instance& inst, const Solution& sol) {
    const int n = static_cast<int>(inst.nodes().size());
    for (const auto& route : sol.routes)
        for (int id : route)
            if (id <= 0 || id >= n) throw UsageError("unknown node id " + std::to_string(id));

    ViolationBreakdown b;
    double distance = 0.0;

    // First occurrence of every node: (route, position).
    std::vector<int> visits(static_cast<std::size_t>(n), 0);
    std::vector<int> route_of(static_cast<std::size_t>(n), -1);
    std::vector<int> pos_of(static_cast<std::size_t>(n), -1);

    int used_routes = 0;
    for (std::size_t r = 0; r < sol.routes.size(); ++r) {
        const Route& route = sol.routes[r];
        if (route.empty()) continue;
        ++used_routes;
        double t = 0.0;
        int load = 0;
        int prev = 0;
        for (std::size_t k = 0; k < route.size(); ++k) {
            const int id = route[k];
            const Node& v = inst.node(id);
            const double leg = inst.dist(prev, id);
            distance += leg;
            const double arrival = t + leg;
            if (arrival > v.tw_close + kTimeEps) ++b.time_window;
            t = std::max(arrival, v.tw_open) + v.service;
            load += v.demand;
            if (load > inst.capacity()) ++b.capacity;
            auto& cnt = visits[static_cast<std::size_t>(id)];
            if (cnt++ == 0) {
                route_of[static_cast<std::size_t>(id)] = static_cast<int>(r);
                pos_of[static_cast<std::size_t>(id)] = static_cast<int>(k);
            }
            prev = id;
        }
        const double back = inst.dist(prev, 0);
        distance += back;
        if (t + back > inst.depot().tw_close + kTimeEps) ++b.time_window;
    }

    for (int id = 1; id < n; ++id)
        if (visits[static_cast<std::size_t>(id)] != 1) ++b.missing_or_duplicate_visit;

    for (const Request& req : inst.requests()) {
        const auto p = static_cast<std::size_t>(req.pickup);
        const auto d = static_cast<std::size_t>(req.delivery);
        if (visits[p] == 0 || visits[d] == 0) continue;
        if (route_of[p] != route_of[d])
            ++b.pair_split;
        else if (pos_of[d] < pos_of[p])
            ++b.precedence;
    }

    b.fleet_size = std::max(0, used_routes - inst.vehicle_count());
    return make_report(b, distance);
}

double penalized_cost(const Instance& inst, const Solution& sol, double penalty) {
    if (!(penalty > 0.0)) throw UsageError("penalty must be positive");
    const ValidationReport r = validate(inst, sol);
    return r.distance + penalty * r.violation_count;
}

nlohmann::json to_wire(const Instance& inst) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& v : inst.nodes()) {
        nodes.push_back({{"id", v.id},
                         {"x", v.x},
                         {"y", v.y},
                         {"demand", v.demand},
                         {"tw_open", v.tw_open},
                         {"tw_close", v.tw_close},
                         {"service", v.service},
                         {"pickup", v.pickup_partner},
                         {"delivery", v.delivery_partner}});
    }
    nlohmann::json requests = nlohmann::json::array();
    for (const Request& r : inst.requests()) requests.push_back({r.pickup, r.delivery});
    return {{"name", inst.name()},
            {"vehicle_count", inst.vehicle_count()},
            {"capacity", inst.capacity()},
            {"nodes", std::move(nodes)},
            {"requests", std::move(requests)}};
}

Instance from_wire(const nlohmann::json& doc) {
    try {
        std::vector<Node> nodes;
        for (const auto& j : doc.at("nodes")) {
            Node v;
            j.at("id").get_to(v.id);
            j.at("x").get_to(v.x);
            j.at("y").get_to(v.y);
            j.at("demand").get_to(v.demand);
            j.at("tw_open").get_to(v.tw_open);
            j.at("tw_close").get_to(v.tw_close);
            j.at("service").get_to(v.service);
            j.at("pickup").get_to(v.pickup_partner);
            j.at("delivery").get_to(v.delivery_partner);
            nodes.push_back(v);
        }
        return Instance(doc.at("name").get<std::string>(), doc.at("vehicle_count").get<int>(),
                        doc.at("capacity").get<int>(), std::move(nodes));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("pdptw wire document: ") + e.what());
    }
}

nlohmann::json to_wire(const Solution& sol) { return {{"routes", sol.routes}}; }

Solution solution_from_wire(const nlohmann::json& doc) {
    try {
        return Solution{doc.at("routes").get<std::vector<Route>>()};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("pdptw solution document: ") + e.what());
    }
}

}  // namespace lago::pdptw
