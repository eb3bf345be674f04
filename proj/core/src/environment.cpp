#include "lago/environment.hpp"

#include <algorithm>
#include <filesystem>

#include "lago/error.hpp"

namespace lago {

std::string_view to_string(EnvKind env) noexcept {
    return env == EnvKind::pdptw ? "pdptw" : "tsp";
}

EnvKind env_from_string(std::string_view s) {
    if (s == "pdptw") return EnvKind::pdptw;
    if (s == "tsp") return EnvKind::tsp;
    throw ConfigError("unknown environment '" + std::string(s) + "' (expected pdptw or tsp)");
}

const std::string& ProblemInstance::name() const {
    return std::visit([](const auto& i) -> const std::string& {
        if constexpr (std::is_same_v<std::decay_t<decltype(i)>, pdptw::Instance>)
            return i.name();
        else
            return i.name;
    }, inst_);
}

std::size_t ProblemInstance::variable_count() const {
    if (env() == EnvKind::pdptw) return as_pdptw().requests().size();
    return as_tsp().size();
}

nlohmann::json ProblemInstance::to_wire() const {
    if (env() == EnvKind::pdptw) return pdptw::to_wire(as_pdptw());
    return tsp::to_wire(as_tsp());
}

ValidationReport ProblemInstance::validate(const nlohmann::json& solution) const {
    if (env() == EnvKind::pdptw)
        return pdptw::validate(as_pdptw(), pdptw::solution_from_wire(solution));
    return tsp::validate_tour(as_tsp(), tsp::tour_from_wire(solution));
}

ProblemInstance load_problem(EnvKind env, const std::string& path) {
    if (env == EnvKind::pdptw) return pdptw::load_instance(path);
    return tsp::load_tsplib(path);
}

std::vector<ProblemInstance> load_instance_dir(EnvKind env, const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ConfigError("instance directory not found: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        const bool match = env == EnvKind::pdptw ? (ext == ".pdptw" || ext == ".txt") : ext == ".tsp";
        if (match) files.push_back(entry.path().filename().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("no " + std::string(to_string(env)) + " instances in " + dir);
    std::vector<ProblemInstance> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_problem(env, (fs::path(dir) / f).string()));
    return out;
}

}  // namespace lago
