// Native stand-in for the Python sandbox harness. It speaks the same wire
// protocol but runs built-in C++ heuristics chosen by `# native:` directives
// in the submitted code, e.g. `# native: construct=cheapest_insertion`.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lago/analyst.hpp"
#include "lago/environment.hpp"
#include "lago/error.hpp"
#include "lago/lns.hpp"
#include "lago/pdptw.hpp"
#include "lago/tsp.hpp"

using nlohmann::json;
namespace lns = lago::lns;

namespace {

constexpr double kPenalty = lago::pdptw::kDefaultPenalty;

struct Failure {
    std::string kind;
    std::string traceback;
};

std::map<std::string, std::string> directives(const std::string& code) {
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    const std::string marker = "# native:";
    while ((pos = code.find(marker, pos)) != std::string::npos) {
        auto end = code.find('\n', pos);
        if (end == std::string::npos) end = code.size();
        std::string body = code.substr(pos + marker.size(), end - pos - marker.size());
        std::size_t p = 0;
        while (p < body.size()) {
            while (p < body.size() && body[p] == ' ') ++p;
            auto q = body.find(' ', p);
            if (q == std::string::npos) q = body.size();
            const std::string item = body.substr(p, q - p);
            if (auto eq = item.find('='); eq != std::string::npos) out[item.substr(0, eq)] = item.substr(eq + 1);
            p = q;
        }
        pos = end;
    }
    return out;
}

[[noreturn]] void spin_forever() {
    volatile unsigned long x = 0;
    for (;;) x = x + 1;
}

void apply_fault(const std::map<std::string, std::string>& d, const char* where) {
    auto it = d.find("fault");
    if (it == d.end()) return;
    if (it->second == "loop") spin_forever();
    if (it->second == "crash") std::_Exit(3);
    if (it->second == "raise")
        throw Failure{"runtime", std::string("Traceback (most recent call last):\n  File \"<candidate>\", in ") + where +
                                     "\nRuntimeError: injected failure"};
}

json error_reply(const std::string& kind, const std::string& tb) {
    return {{"status", "error"}, {"kind", kind}, {"traceback", tb}};
}

json evaluate(const json& req) {
    const std::string cons = req.at("cons_code").get<std::string>();
    const std::string ref = req.at("ref_code").get<std::string>();
    const auto env = lago::env_from_string(req.at("env").get<std::string>());
    const auto& budget_doc = req.at("budget");
    lns::Budget budget;
    budget.iterations = budget_doc.at("iterations").get<int>();
    budget.time_limit_s = budget_doc.at("time_limit_s").get<double>();
    budget.seed = req.at("seed").get<std::uint64_t>();

    if (cons.find("def _init_solution") == std::string::npos)
        return error_reply("load", "NameError: name '_init_solution' is not defined");
    if (ref.find("def heuristic") == std::string::npos)
        return error_reply("load", "NameError: name 'heuristic' is not defined");
    if (cons.find("<<syntax error>>") != std::string::npos || ref.find("<<syntax error>>") != std::string::npos)
        return error_reply("load", "  File \"<candidate>\", line 1\nSyntaxError: invalid syntax");
    const auto dc = directives(cons);
    const auto dr = directives(ref);
    if (!dc.count("construct"))
        return error_reply("load", "ImportError: native harness needs a `# native: construct=...` directive");
    if (!dr.count("score"))
        return error_reply("load", "ImportError: native harness needs a `# native: score=...` directive");
    if (dc.count("fault") && dc.at("fault") == "garbage") {
        std::cout << "this is not json\n" << std::flush;
        return nullptr;
    }
    if (budget.time_limit_s <= 0.0)
        return error_reply("timeout", "TimeoutError: time limit of " + std::to_string(budget.time_limit_s) +
                                          " s reached before the first iteration");

    const bool bad_length = dr.count("fault") && dr.at("fault") == "bad_length";
    const auto length_error = [](std::size_t got, std::size_t want) {
        return Failure{"runtime", "Traceback (most recent call last):\n  File \"<skeleton>\", in run\n"
                                  "ValueError: heuristic returned " +
                                      std::to_string(got) + " scores for " + std::to_string(want) +
                                      " decision variables (length check failed)"};
    };

    json log = json::array();
    if (env == lago::EnvKind::pdptw) {
        const auto inst = lago::pdptw::from_wire(req.at("instance"));
        lns::pd::Construct construct;
        const std::string c = dc.at("construct");
        if (c == "cheapest_insertion")
            construct = [](const lago::pdptw::Instance& i) { return lns::pd::construct_cheapest_insertion(i, kPenalty); };
        else if (c == "route_per_request")
            construct = lns::pd::construct_route_per_request;
        else
            return error_reply("load", "AttributeError: unknown native constructor '" + c + "'");
        lns::pd::Score score;
        const std::string s = dr.at("score");
        if (s == "removal_gain")
            score = [](const lago::pdptw::Instance& i, const lago::pdptw::Solution& x) {
                return lns::pd::score_removal_gain(i, x, kPenalty);
            };
        else if (s == "uniform")
            score = lns::pd::score_uniform;
        else if (s == "window_tightness")
            score = lns::pd::score_window_tightness;
        else
            return error_reply("load", "AttributeError: unknown native scorer '" + s + "'");
        const auto wrapped_construct = [&](const lago::pdptw::Instance& i) {
            apply_fault(dc, "_init_solution");
            return construct(i);
        };
        const auto wrapped_score = [&](const lago::pdptw::Instance& i, const lago::pdptw::Solution& x) {
            apply_fault(dr, "heuristic");
            auto v = score(i, x);
            if (bad_length) v.pop_back();
            if (v.size() != i.requests().size()) throw length_error(v.size(), i.requests().size());
            return v;
        };
        const auto out = lns::pd::search(inst, wrapped_construct, wrapped_score, budget, kPenalty);
        const auto report = lago::pdptw::validate(inst, out.best);
        log.push_back({{"iterations", out.iterations_done}, {"best_cost", out.best_cost}});
        return {{"status", "ok"},
                {"solution", lago::pdptw::to_wire(out.best)},
                {"cost", out.best_cost},
                {"violations", report.violation_count},
                {"iterations_done", out.iterations_done},
                {"log", log}};
    }

    const auto inst = lago::tsp::from_wire(req.at("instance"));
    lns::ts::Construct construct;
    const std::string c = dc.at("construct");
    if (c == "nearest_neighbor")
        construct = lns::ts::construct_nearest_neighbor;
    else if (c == "identity")
        construct = lns::ts::construct_identity;
    else
        return error_reply("load", "AttributeError: unknown native constructor '" + c + "'");
    lns::ts::Score score;
    const std::string s = dr.at("score");
    if (s == "removal_gain")
        score = lns::ts::score_removal_gain;
    else if (s == "uniform")
        score = lns::ts::score_uniform;
    else
        return error_reply("load", "AttributeError: unknown native scorer '" + s + "'");
    const auto wrapped_construct = [&](const lago::tsp::Instance& i) {
        apply_fault(dc, "_init_solution");
        return construct(i);
    };
    const auto wrapped_score = [&](const lago::tsp::Instance& i, const lago::tsp::Tour& t) {
        apply_fault(dr, "heuristic");
        auto v = score(i, t);
        if (bad_length) v.pop_back();
        if (v.size() != i.coords.size()) throw length_error(v.size(), i.coords.size());
        return v;
    };
    const auto out = lns::ts::search(inst, wrapped_construct, wrapped_score, budget, kPenalty);
    const auto report = lago::tsp::validate_tour(inst, out.best);
    log.push_back({{"iterations", out.iterations_done}, {"best_cost", out.best_cost}});
    return {{"status", "ok"},
            {"solution", lago::tsp::to_wire(out.best)},
            {"cost", out.best_cost},
            {"violations", report.violation_count},
            {"iterations_done", out.iterations_done},
            {"log", log}};
}

// A feature either yields a number (possibly non-finite) or raises.
using FeatureValue = std::optional<double>;

FeatureValue pdptw_feature(const std::string& name, const lago::pdptw::Instance& inst,
                           const lago::pdptw::Solution& sol, std::string& error) {
    const auto rep = lago::pdptw::validate(inst, sol);
    int used = 0;
    std::size_t visits = 0;
    for (const auto& r : sol.routes)
        if (!r.empty()) {
            ++used;
            visits += r.size();
        }
    const auto& nodes = inst.nodes();
    const double customers = static_cast<double>(nodes.size() - 1);
    if (name == "route_count") return used;
    if (name == "total_distance") return rep.distance;
    if (name == "mean_route_length") return used ? static_cast<double>(visits) / used : 0.0;
    if (name == "violation_count") return rep.violation_count;
    if (name == "late_node_fraction") return rep.breakdown.time_window / customers;
    if (name == "capacity_utilization") {
        double picked = 0.0;
        for (const auto& n : nodes)
            if (n.demand > 0) picked += n.demand;
        return used ? picked / (static_cast<double>(inst.capacity()) * used) : 0.0;
    }
    if (name == "depot_spread") {
        double s = 0.0;
        for (std::size_t i = 1; i < nodes.size(); ++i) s += inst.dist(0, static_cast<int>(i));
        return s / customers;
    }
    if (name == "tw_tightness") {
        double s = 0.0;
        for (std::size_t i = 1; i < nodes.size(); ++i) s += nodes[i].tw_close - nodes[i].tw_open;
        return s / customers / std::max(1.0, inst.depot().tw_close);
    }
    if (name == "inverse_violation_count") {
        if (rep.violation_count == 0) {
            error = "Traceback (most recent call last):\n  File \"<features>\", in inverse_violation_count\n"
                    "ZeroDivisionError: float division by zero";
            return std::nullopt;
        }
        return 1.0 / rep.violation_count;
    }
    if (name == "constant_one") return 1.0;
    if (name == "nan_value") return std::nan("");
    if (name == "text_label") {
        error = "TypeError: text_label returned str, expected float";
        return std::nullopt;
    }
    error = "NameError: name '" + name + "' is not defined";
    return std::nullopt;
}

FeatureValue tsp_feature(const std::string& name, const lago::tsp::Instance& inst, const lago::tsp::Tour& tour,
                         std::string& error) {
    const auto rep = lago::tsp::validate_tour(inst, tour);
    const auto n = inst.coords.size();
    if (name == "tour_length") return rep.distance;
    if (name == "mean_edge_length") return rep.distance / static_cast<double>(n);
    if (name == "max_edge_ratio") {
        if (rep.violation_count) return 0.0;
        double mx = 0.0;
        for (std::size_t i = 0; i < tour.order.size(); ++i)
            mx = std::max(mx, inst.dist(tour.order[i], tour.order[(i + 1) % tour.order.size()]));
        return rep.distance > 0 ? mx / (rep.distance / static_cast<double>(n)) : 0.0;
    }
    if (name == "city_spread") {
        double cx = 0.0, cy = 0.0;
        for (const auto& p : inst.coords) {
            cx += p.x;
            cy += p.y;
        }
        cx /= static_cast<double>(n);
        cy /= static_cast<double>(n);
        double s = 0.0;
        for (const auto& p : inst.coords) s += std::hypot(p.x - cx, p.y - cy);
        return s / static_cast<double>(n);
    }
    if (name == "route_count") return 1.0;
    if (name == "constant_one") return 1.0;
    if (name == "nan_value") return std::nan("");
    if (name == "inverse_violation_count") {
        if (rep.violation_count == 0) {
            error = "ZeroDivisionError: float division by zero";
            return std::nullopt;
        }
        return 1.0 / rep.violation_count;
    }
    if (name == "text_label") {
        error = "TypeError: text_label returned str, expected float";
        return std::nullopt;
    }
    error = "NameError: name '" + name + "' is not defined";
    return std::nullopt;
}

json features(const json& req) {
    const std::string code = req.at("feature_code").get<std::string>();
    const auto d = directives(code);
    apply_fault(d, "<module>");
    std::string why;
    const auto fs = lago::parse_feature_code(code, 1 << 20, &why);
    if (!fs) return error_reply("load", "NameError: name 'feature_func_list' is not defined (" + why + ")");

    const json& inst_doc = req.at("instance");
    const json& sol_doc = req.at("solution");
    json values = json::array();
    json errors = json::object();
    const bool is_tsp = inst_doc.contains("coords");
    std::optional<lago::pdptw::Instance> pi;
    std::optional<lago::tsp::Instance> ti;
    if (is_tsp)
        ti = lago::tsp::from_wire(inst_doc);
    else
        pi = lago::pdptw::from_wire(inst_doc);
    for (const auto& name : fs->names) {
        std::string error;
        FeatureValue v = is_tsp ? tsp_feature(name, *ti, lago::tsp::tour_from_wire(sol_doc), error)
                                : pdptw_feature(name, *pi, lago::pdptw::solution_from_wire(sol_doc), error);
        if (!error.empty()) {
            errors[name] = error;
            values.push_back(nullptr);
        } else if (!v || !std::isfinite(*v)) {
            values.push_back(nullptr);
        } else {
            values.push_back(*v);
        }
    }
    return {{"status", "ok"}, {"names", fs->names}, {"values", values}, {"errors", errors}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Native LNS harness speaking the sandbox wire protocol"};
    std::string version = "1";
    app.add_option("--protocol-version", version, "Version reported in the handshake");
    CLI11_PARSE(app, argc, argv);

    std::ios::sync_with_stdio(false);
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        json reply;
        json req;
        try {
            req = json::parse(line);
            if (!req.is_object() || !req.contains("op") || !req["op"].is_string())
                throw lago::ProtocolError("request without an op");
        } catch (const std::exception& e) {
            std::cout << error_reply("protocol", std::string("malformed request: ") + e.what()).dump() << '\n'
                      << std::flush;
            continue;
        }
        const std::string op = req["op"].get<std::string>();
        try {
            if (op == "handshake") {
                reply = {{"status", "ok"}, {"op", "handshake"}, {"version", version},
                         {"envs", {"pdptw", "tsp"}}, {"runtime", "native"}};
            } else if (op == "evaluate") {
                reply = evaluate(req);
            } else if (op == "features") {
                reply = features(req);
            } else {
                reply = error_reply("protocol", "unknown op '" + op + "'");
            }
        } catch (const Failure& f) {
            reply = error_reply(f.kind, f.traceback);
        } catch (const lago::UsageError& e) {
            reply = error_reply("runtime", std::string("Traceback (most recent call last):\nValueError: ") + e.what());
        } catch (const std::exception& e) {
            reply = error_reply("runtime", std::string("Traceback (most recent call last):\nException: ") + e.what());
        }
        if (reply.is_null()) continue;
        std::cout << reply.dump() << '\n' << std::flush;
    }
    return 0;
}
