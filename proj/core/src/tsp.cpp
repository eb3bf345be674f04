#include "lago/tsp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lago/error.hpp"

namespace lago::tsp {

namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

}  // namespace

double Instance::dist(std::size_t a, std::size_t b) const {
    const double dx = coords[a].x - coords[b].x;
    const double dy = coords[a].y - coords[b].y;
    return std::floor(std::sqrt(dx * dx + dy * dy) + 0.5);
}

Instance parse_tsplib(std::string_view text) {
    Instance inst;
    long dimension = -1;
    std::string edge_type;
    bool in_coords = false;

    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (line == "EOF") break;
        if (in_coords) {
            std::istringstream fields(line);
            long index = 0;
            Point p;
            if (!(fields >> index >> p.x >> p.y)) {
                // A new keyword section ends the coordinates.
                if (std::isalpha(static_cast<unsigned char>(line.front()))) {
                    in_coords = false;
                } else {
                    throw ParseError("expected 'index x y'", line_no);
                }
            } else {
                if (index != static_cast<long>(inst.coords.size()) + 1)
                    throw ParseError("node index out of sequence", line_no);
                inst.coords.push_back(p);
                continue;
            }
        }
        if (line == "NODE_COORD_SECTION") {
            if (edge_type.empty()) throw ParseError("EDGE_WEIGHT_TYPE must precede coordinates", line_no);
            in_coords = true;
            continue;
        }
        const auto colon = line.find(':');
        if (colon == std::string::npos) {
            if (line.find("_SECTION") != std::string::npos)
                throw UnsupportedFormatError("unsupported TSPLIB section " + line);
            throw ParseError("expected 'KEY : VALUE'", line_no);
        }
        const std::string key = trim(line.substr(0, colon));
        const std::string value = trim(line.substr(colon + 1));
        if (key == "NAME") {
            inst.name = value;
        } else if (key == "DIMENSION") {
            try {
                dimension = std::stol(value);
            } catch (const std::exception&) {
                throw ParseError("bad DIMENSION", line_no);
            }
        } else if (key == "EDGE_WEIGHT_TYPE") {
            if (value != "EUC_2D")
                throw UnsupportedFormatError("unsupported EDGE_WEIGHT_TYPE " + value +
                                             " (only EUC_2D)");
            edge_type = value;
        } else if (key == "TYPE") {
            if (value != "TSP") throw UnsupportedFormatError("unsupported TYPE " + value);
        }
    }
    if (edge_type.empty()) throw ParseError("missing EDGE_WEIGHT_TYPE");
    if (dimension >= 0 && static_cast<std::size_t>(dimension) != inst.coords.size())
        throw ParseError("DIMENSION " + std::to_string(dimension) + " but " +
                         std::to_string(inst.coords.size()) + " coordinates");
    if (inst.coords.size() < 3) throw ParseError("a TSP instance needs at least 3 cities");
    return inst;
}

Instance load_tsplib(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open TSPLIB file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    Instance inst = parse_tsplib(buf.str());
    if (inst.name.empty()) {
        std::string stem = path.substr(path.find_last_of('/') + 1);
        inst.name = stem.substr(0, stem.find_last_of('.'));
    }
    return inst;
}

double tour_length(const Instance& inst, const Tour& tour) {
    const std::size_t n = inst.size();
    if (tour.order.size() != n) throw UsageError("tour is not a permutation (wrong length)");
    std::vector<char> seen(n, 0);
    for (int c : tour.order) {
        if (c < 0 || static_cast<std::size_t>(c) >= n || seen[static_cast<std::size_t>(c)])
            throw UsageError("tour is not a permutation");
        seen[static_cast<std::size_t>(c)] = 1;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        total += inst.dist(static_cast<std::size_t>(tour.order[i]),
                           static_cast<std::size_t>(tour.order[(i + 1) % n]));
    return total;
}

ValidationReport validate_tour(const Instance& inst, const Tour& tour) {
    const std::size_t n = inst.size();
    std::vector<int> visits(n, 0);
    std::vector<std::size_t> valid;
    int out_of_range = 0;
    for (int c : tour.order) {
        if (c < 0 || static_cast<std::size_t>(c) >= n) {
            ++out_of_range;
            continue;
        }
        ++visits[static_cast<std::size_t>(c)];
        valid.push_back(static_cast<std::size_t>(c));
    }
    ViolationBreakdown b;
    b.missing_or_duplicate_visit =
        out_of_range + static_cast<int>(std::count_if(visits.begin(), visits.end(),
                                                      [](int v) { return v != 1; }));
    double distance = 0.0;
    if (valid.size() >= 2)
        for (std::size_t i = 0; i < valid.size(); ++i)
            distance += inst.dist(valid[i], valid[(i + 1) % valid.size()]);
    return make_report(b, distance);
}

nlohmann::json to_wire(const Instance& inst) {
    nlohmann::json coords = nlohmann::json::array();
    for (const Point& p : inst.coords) coords.push_back({p.x, p.y});
    return {{"name", inst.name}, {"coords", std::move(coords)}};
}

Instance from_wire(const nlohmann::json& doc) {
    try {
        Instance inst;
        doc.at("name").get_to(inst.name);
        for (const auto& c : doc.at("coords")) inst.coords.push_back({c.at(0), c.at(1)});
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("tsp wire document: ") + e.what());
    }
}

nlohmann::json to_wire(const Tour& tour) { return {{"tour", tour.order}}; }

Tour tour_from_wire(const nlohmann::json& doc) {
    try {
        return Tour{doc.at("tour").get<std::vector<int>>()};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("tsp solution document: ") + e.what());
    }
}

}  // namespace lago::tsp
