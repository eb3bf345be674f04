#include "lago/serialization.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lago/error.hpp"

namespace lago {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("field '") + key + "': " + e.what());
    }
}

json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_number(const json& j) {
    if (j.is_null()) return std::nullopt;
    if (!j.is_number()) throw ParseError("expected a number or null");
    return j.get<double>();
}

json numbers(const std::vector<std::optional<double>>& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(opt_number(x));
    return out;
}

std::vector<std::optional<double>> numbers(const json& j) {
    if (!j.is_array()) throw ParseError("expected an array");
    std::vector<std::optional<double>> out;
    for (const auto& x : j) out.push_back(opt_number(x));
    return out;
}

}  // namespace

void to_json(json& j, const HeuristicIndividual& v) {
    j = json{{"id", v.id},
             {"cons_code", v.cons_code},
             {"ref_code", v.ref_code},
             {"source", v.source},
             {"description", v.description},
             {"operator", std::string(to_string(v.op))},
             {"parent_ids", v.parent_ids},
             {"iteration_born", v.iteration_born},
             {"parse_warning", v.parse_warning}};
}

void from_json(const json& j, HeuristicIndividual& v) {
    v.id = field<std::string>(j, "id");
    v.cons_code = field<std::string>(j, "cons_code");
    v.ref_code = field<std::string>(j, "ref_code");
    v.source = field<std::string>(j, "source");
    v.description = field<std::string>(j, "description");
    v.op = operator_from_string(field<std::string>(j, "operator"));
    v.parent_ids = field<std::vector<std::string>>(j, "parent_ids");
    v.iteration_born = field<int>(j, "iteration_born");
    v.parse_warning = field<bool>(j, "parse_warning");
}

void to_json(json& j, const FitnessVector& v) { j = std::vector<double>(v.values().begin(), v.values().end()); }

void from_json(const json& j, FitnessVector& v) {
    if (!j.is_array()) throw ParseError("fitness vector must be an array");
    v = FitnessVector(j.get<std::vector<double>>());
}

void to_json(json& j, const InstanceProfile& v) {
    j = json{{"instance", v.instance_id}, {"fitness", v.fitness}, {"features", numbers(v.features)}};
}

void from_json(const json& j, InstanceProfile& v) {
    v.instance_id = field<std::string>(j, "instance");
    v.fitness = field<double>(j, "fitness");
    v.features = numbers(j.at("features"));
}

void to_json(json& j, const SemanticGradient& v) {
    json stats = json::array();
    for (const auto& s : v.stats)
        stats.push_back(s ? json{{"min", s->min}, {"max", s->max}, {"mean", s->mean}} : json(nullptr));
    j = json{{"mean_fitness", v.mean_fitness},
             {"feature_names", v.feature_names},
             {"stats", stats},
             {"best_instance", v.best_instance ? json(*v.best_instance) : json(nullptr)},
             {"worst_instance", v.worst_instance ? json(*v.worst_instance) : json(nullptr)},
             {"error_msg", v.error_msg}};
}

void from_json(const json& j, SemanticGradient& v) {
    v.mean_fitness = field<double>(j, "mean_fitness");
    v.feature_names = field<std::vector<std::string>>(j, "feature_names");
    v.stats.clear();
    for (const auto& s : field<json>(j, "stats")) {
        if (s.is_null())
            v.stats.push_back(std::nullopt);
        else
            v.stats.push_back(FeatureStats{field<double>(s, "min"), field<double>(s, "max"), field<double>(s, "mean")});
    }
    if (v.stats.size() != v.feature_names.size()) throw ParseError("gradient stats and feature names differ in length");
    const auto best = field<json>(j, "best_instance");
    const auto worst = field<json>(j, "worst_instance");
    v.best_instance = best.is_null() ? std::nullopt : std::optional(best.get<InstanceProfile>());
    v.worst_instance = worst.is_null() ? std::nullopt : std::optional(worst.get<InstanceProfile>());
    v.error_msg = field<std::string>(j, "error_msg");
}

void to_json(json& j, const Member& v) {
    j = json{{"individual", v.individual}, {"fitness", v.fitness}, {"gradient", v.gradient}};
}

void from_json(const json& j, Member& v) {
    v.individual = field<HeuristicIndividual>(j, "individual");
    v.fitness = field<FitnessVector>(j, "fitness");
    v.gradient = field<SemanticGradient>(j, "gradient");
}

void to_json(json& j, const ViolationBreakdown& v) {
    j = json{{"missing_or_duplicate_visit", v.missing_or_duplicate_visit},
             {"pair_split", v.pair_split},
             {"precedence", v.precedence},
             {"time_window", v.time_window},
             {"capacity", v.capacity},
             {"fleet_size", v.fleet_size}};
}

void from_json(const json& j, ViolationBreakdown& v) {
    v.missing_or_duplicate_visit = field<int>(j, "missing_or_duplicate_visit");
    v.pair_split = field<int>(j, "pair_split");
    v.precedence = field<int>(j, "precedence");
    v.time_window = field<int>(j, "time_window");
    v.capacity = field<int>(j, "capacity");
    v.fleet_size = field<int>(j, "fleet_size");
}

void to_json(json& j, const TraceRecord& v) {
    j = json{{"instance", v.instance},
             {"solution", v.solution ? *v.solution : json(nullptr)},
             {"raw_cost", v.raw_cost},
             {"violation_count", v.violation_count},
             {"breakdown", v.breakdown},
             {"feasible", v.feasible},
             {"penalized_cost", v.penalized_cost},
             {"internal_fitness", v.internal_fitness},
             {"wall_time", v.wall_time},
             {"lns_iterations", v.lns_iterations},
             {"error_text", v.error_text},
             {"timed_out", v.timed_out}};
}

void from_json(const json& j, TraceRecord& v) {
    v.instance = field<std::string>(j, "instance");
    const auto sol = field<json>(j, "solution");
    v.solution = sol.is_null() ? std::nullopt : std::optional(sol);
    v.raw_cost = field<double>(j, "raw_cost");
    v.violation_count = field<int>(j, "violation_count");
    v.breakdown = field<ViolationBreakdown>(j, "breakdown");
    v.feasible = field<bool>(j, "feasible");
    v.penalized_cost = field<double>(j, "penalized_cost");
    v.internal_fitness = field<double>(j, "internal_fitness");
    v.wall_time = field<double>(j, "wall_time");
    v.lns_iterations = field<int>(j, "lns_iterations");
    v.error_text = field<std::string>(j, "error_text");
    v.timed_out = field<bool>(j, "timed_out");
}

void to_json(json& j, const ExecutionTrace& v) { j = json{{"individual", v.individual_id}, {"records", v.records}}; }

void from_json(const json& j, ExecutionTrace& v) {
    v.individual_id = field<std::string>(j, "individual");
    v.records = field<std::vector<TraceRecord>>(j, "records");
}

void to_json(json& j, const FeatureSet& v) {
    j = json{{"source", v.source},
             {"names", v.names},
             {"iteration", v.iteration},
             {"status", std::string(to_string(v.status))}};
}

void from_json(const json& j, FeatureSet& v) {
    v.source = field<std::string>(j, "source");
    v.names = field<std::vector<std::string>>(j, "names");
    v.iteration = field<int>(j, "iteration");
    v.status = feature_status_from_string(field<std::string>(j, "status"));
}

json population_to_json(const PopulationDoc& doc) {
    return json{{"iteration", doc.population.iteration},
                {"members", doc.population.members},
                {"feature_set", doc.features ? json(*doc.features) : json(nullptr)},
                {"events", doc.events}};
}

PopulationDoc population_from_json(const json& j) {
    PopulationDoc doc;
    doc.population.iteration = field<int>(j, "iteration");
    doc.population.members = field<std::vector<Member>>(j, "members");
    const auto fs = field<json>(j, "feature_set");
    if (!fs.is_null()) doc.features = fs.get<FeatureSet>();
    doc.events = field<std::vector<std::string>>(j, "events");
    return doc;
}

std::string dump_document(const json& j) { return j.dump(2) + "\n"; }

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace lago
