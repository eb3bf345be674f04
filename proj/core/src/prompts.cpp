#include "lago/prompts.hpp"

#include "lago/error.hpp"

namespace lago::prompts {

namespace detail {
const std::map<std::string_view, std::string_view>& embedded();
}

std::string_view raw(std::string_view name) {
    const auto& files = detail::embedded();
    auto it = files.find(name);
    if (it == files.end()) throw ConfigError("no embedded prompt file '" + std::string(name) + "'");
    return it->second;
}

std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find('{', pos);
        if (open == std::string_view::npos) break;
        const auto close = tmpl.find('}', open + 1);
        if (close == std::string_view::npos) break;
        auto it = values.find(std::string(tmpl.substr(open + 1, close - open - 1)));
        if (it == values.end()) {
            out.append(tmpl.substr(pos, open + 1 - pos));
            pos = open + 1;
            continue;
        }
        out.append(tmpl.substr(pos, open - pos));
        out.append(it->second);
        pos = close + 1;
    }
    out.append(tmpl.substr(pos));
    return out;
}

namespace {

std::string env_file(std::string_view stem, EnvKind env, std::string_view ext) {
    return std::string(stem) + "_" + std::string(to_string(env)) + std::string(ext);
}

}  // namespace

ProblemDescription problem_description(EnvKind env) {
    std::string text(raw(env_file("problem", env, ".txt")));
    while (!text.empty() && text.back() == '\n') text.pop_back();
    return ProblemDescription{std::move(text), std::string(template_heuristic(env))};
}

std::string_view template_heuristic(EnvKind env) { return raw(env_file("template_heuristic", env, ".py")); }

std::string_view template_analyst_code(EnvKind env) { return raw(env_file("template_analyst", env, ".py")); }

std::string_view baseline_code(EnvKind env) { return raw(env_file("baseline", env, ".py")); }

}  // namespace lago::prompts
