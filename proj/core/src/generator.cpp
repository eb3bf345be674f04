#include "lago/generator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lago/error.hpp"
#include "lago/prompts.hpp"

namespace lago {

void OperatorSchedule::check() const {
    if (init_count < 1) throw ConfigError("schedule: init_count must be >= 1");
    if (e1 < 0 || e2 < 0 || m1 < 0) throw ConfigError("schedule: operator counts must be >= 0");
    if (per_iteration() < 1) throw ConfigError("schedule: e1 + e2 + m1 must be >= 1");
}

void SurvivalConfig::check() const {
    if (population_size < 1) throw ConfigError("survival: population_size must be >= 1");
    if (elite_count < 0 || elite_count >= population_size)
        throw ConfigError("survival: need 0 <= elite_count < population_size");
    if (!(beta > 0.0)) throw ConfigError("survival: beta must be positive");
    if (!(epsilon > 0.0)) throw ConfigError("survival: epsilon must be positive");
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

bool is_blank(std::string_view line) { return line.find_first_not_of(" \t\r") == std::string_view::npos; }

bool is_indented(std::string_view line) { return !line.empty() && (line[0] == ' ' || line[0] == '\t'); }

bool defines(std::string_view line, std::string_view fn) {
    for (std::string_view prefix : {"def ", "async def "}) {
        if (!starts_with(line, prefix)) continue;
        auto rest = line.substr(prefix.size());
        rest.remove_prefix(std::min(rest.find_first_not_of(' '), rest.size()));
        if (starts_with(rest, fn)) {
            rest.remove_prefix(fn.size());
            rest.remove_prefix(std::min(rest.find_first_not_of(' '), rest.size()));
            return starts_with(rest, "(");
        }
    }
    return false;
}

// A non-indented line that reads as Python rather than prose.
bool is_top_level_code(std::string_view line) {
    for (std::string_view p : {"def ", "async def ", "class ", "import ", "from ", "@", "#", "\"\"\"", "'''", ")", "]", "}"})
        if (starts_with(line, p)) return true;
    std::size_t i = 0;
    if (line.empty() || !(std::isalpha(static_cast<unsigned char>(line[0])) || line[0] == '_')) return false;
    while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_')) ++i;
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) return false;
    if (line[i] == '=' || line[i] == '(' || line[i] == '[' || line[i] == '.') return true;
    if (line[i] == ':') return line.find('=', i) != std::string_view::npos;
    return false;
}

// Tracks whether a triple-quoted string is open across lines.
struct TripleQuoteState {
    std::string_view open;  // empty when outside

    void feed(std::string_view line) {
        std::size_t pos = 0;
        while (pos < line.size()) {
            if (open.empty()) {
                const auto a = line.find("\"\"\"", pos);
                const auto b = line.find("'''", pos);
                const auto hit = std::min(a, b);
                if (hit == std::string_view::npos) return;
                open = hit == a ? std::string_view("\"\"\"") : std::string_view("'''");
                pos = hit + 3;
            } else {
                const auto close = line.find(open, pos);
                if (close == std::string_view::npos) return;
                pos = close + 3;
                open = {};
            }
        }
    }
};

std::string trim_block(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && s[start] == '\n') ++start;
    return s.substr(start);
}

// Text of the first balanced {...} block at or after `from`, without the braces.
std::optional<std::string> first_brace_block(std::string_view text, std::size_t from = 0) {
    const auto open = text.find('{', from);
    if (open == std::string_view::npos) return std::nullopt;
    int depth = 0;
    for (std::size_t i = open; i < text.size(); ++i) {
        if (text[i] == '{') ++depth;
        if (text[i] == '}' && --depth == 0) return std::string(text.substr(open + 1, i - open - 1));
    }
    return std::nullopt;
}

std::string squash_whitespace(std::string s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(c);
    }
    return out;
}

std::optional<std::string> extract_description(std::string_view response, std::string_view prose) {
    for (std::string_view quote : {"\"\"\"", "'''"}) {
        std::size_t pos = 0;
        while (true) {
            const auto open = response.find(quote, pos);
            if (open == std::string_view::npos) break;
            const auto close = response.find(quote, open + 3);
            if (close == std::string_view::npos) break;
            const auto inner = response.substr(open + 3, close - open - 3);
            if (auto block = first_brace_block(inner)) {
                auto d = squash_whitespace(*block);
                if (!d.empty()) return d;
            }
            pos = close + 3;
        }
    }
    // Fall back to the prose only: braces inside code are dict literals, not descriptions.
    if (auto block = first_brace_block(prose)) {
        auto d = squash_whitespace(*block);
        if (!d.empty()) return d;
    }
    return std::nullopt;
}

// The response with fenced blocks and the extracted code region removed.
std::string prose_of(std::string_view response, std::string_view code) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto open = response.find("```", pos);
        if (open == std::string_view::npos) break;
        out.append(response.substr(pos, open - pos));
        const auto close = response.find("```", open + 3);
        if (close == std::string_view::npos) {
            pos = response.size();
            break;
        }
        pos = close + 3;
    }
    out.append(response.substr(pos));
    if (!code.empty())
        if (auto at = out.find(code); at != std::string::npos) out.erase(at, code.size());
    return out;
}

std::string fenced_code(std::string_view response) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto open = response.find("```", pos);
        if (open == std::string_view::npos) break;
        const auto body = response.find('\n', open);
        if (body == std::string_view::npos) break;
        const auto close = response.find("```", body + 1);
        const auto end = close == std::string_view::npos ? response.size() : close;
        if (!out.empty()) out += "\n\n";
        out += trim_block(std::string(response.substr(body + 1, end - body - 1)));
        if (close == std::string_view::npos) break;
        pos = close + 3;
    }
    return out;
}

bool has_both(std::string_view code) {
    bool cons = false;
    bool ref = false;
    for (auto line : split_lines(code)) {
        cons = cons || defines(line, "_init_solution");
        ref = ref || defines(line, "heuristic");
    }
    return cons && ref;
}

std::string code_region(std::string_view response) {
    const auto lines = split_lines(response);
    std::size_t first = lines.size();
    std::size_t last = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (defines(lines[i], "_init_solution") || defines(lines[i], "heuristic")) {
            first = std::min(first, i);
            last = std::max(last, i);
        }
    }
    if (first == lines.size()) return {};
    auto code_like = [&](std::string_view l) { return is_blank(l) || is_indented(l) || is_top_level_code(l); };
    std::size_t begin = first;
    while (begin > 0 && code_like(lines[begin - 1])) --begin;
    std::size_t end = last + 1;
    while (end < lines.size() && code_like(lines[end])) ++end;
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        out.append(lines[i]);
        out.push_back('\n');
    }
    return trim_block(out);
}

}  // namespace

std::pair<std::string, std::string> split_code(std::string_view code) {
    enum class Kind { shared, cons, ref };
    struct Block {
        Kind kind = Kind::shared;
        std::string text;
    };
    std::vector<Block> blocks;
    std::string pending;  // top-level comments/decorators waiting for the next block
    TripleQuoteState quotes;

    for (auto line : split_lines(code)) {
        const bool in_string = !quotes.open.empty();
        quotes.feed(line);
        const bool starts_block = !in_string && !is_blank(line) && !is_indented(line);
        if (starts_block && (starts_with(line, "#") || starts_with(line, "@"))) {
            pending.append(line);
            pending.push_back('\n');
            continue;
        }
        if (starts_block) {
            Block b;
            if (defines(line, "_init_solution")) b.kind = Kind::cons;
            else if (defines(line, "heuristic")) b.kind = Kind::ref;
            b.text = std::move(pending);
            pending.clear();
            blocks.push_back(std::move(b));
        } else if (blocks.empty() || (!pending.empty() && is_blank(line))) {
            pending.append(line);
            pending.push_back('\n');
            continue;
        }
        blocks.back().text.append(line);
        blocks.back().text.push_back('\n');
    }
    if (!pending.empty() && !blocks.empty()) blocks.back().text += pending;

    // Python keeps the last definition; drop earlier ones.
    std::size_t last_cons = blocks.size();
    std::size_t last_ref = blocks.size();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].kind == Kind::cons) last_cons = i;
        if (blocks[i].kind == Kind::ref) last_ref = i;
    }
    if (last_cons == blocks.size()) throw ParseError("response does not define _init_solution");
    if (last_ref == blocks.size()) throw ParseError("response does not define heuristic");

    std::string cons;
    std::string ref;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        const std::string text = trim_block(b.text) + "\n\n\n";
        if (b.kind == Kind::shared) {
            cons += text;
            ref += text;
        } else if (i == last_cons) {
            cons += text;
        } else if (i == last_ref) {
            ref += text;
        }
    }
    return {trim_block(cons) + "\n", trim_block(ref) + "\n"};
}

ExtractedCode extract_code(std::string_view response) {
    ExtractedCode out;
    std::string code = fenced_code(response);
    if (!has_both(code)) code = code_region(response);
    if (code.empty()) throw ParseError("response contains no code defining _init_solution and heuristic");
    auto [cons, ref] = split_code(code);
    out.code = std::move(code);
    out.cons_code = std::move(cons);
    out.ref_code = std::move(ref);
    if (auto d = extract_description(response, prose_of(response, out.code))) {
        out.description = std::move(*d);
    } else {
        out.description_missing = true;
    }
    return out;
}

std::vector<std::size_t> select_parents(const Population& pop, Operator op, const SurvivalConfig& cfg, Rng& rng) {
    const auto& m = pop.members;
    const std::size_t needed = op == Operator::m1 ? 1 : 2;
    if (op == Operator::i1) throw UsageError("i1 takes no parents");
    if (m.size() < needed)
        throw UsageError("population of " + std::to_string(m.size()) + " too small for " +
                         std::string(to_string(op)));

    std::vector<double> w(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) w[i] = std::exp(cfg.beta * m[i].mean());
    const std::size_t first = rng.weighted(w);
    if (needed == 1) return {first};

    std::vector<double> w2(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i)
        if (i != first) w2[i] = w[i] * (pairwise_distance(m[first].fitness, m[i].fitness) + cfg.epsilon);
    const std::size_t second = rng.weighted(w2);
    if (ranks_ahead(m[second], m[first])) return {second, first};
    return {first, second};
}

SurvivalResult survive(const std::vector<Member>& pop, const std::vector<Member>& candidates,
                       const SurvivalConfig& cfg, Rng& rng, int iteration) {
    std::vector<const Member*> pool;
    for (const auto& m : pop) pool.push_back(&m);
    for (const auto& m : candidates) pool.push_back(&m);
    std::sort(pool.begin(), pool.end(), [](const Member* a, const Member* b) { return ranks_ahead(*a, *b); });
    {
        std::vector<std::string> ids;
        for (auto* p : pool) ids.push_back(p->individual.id);
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
            throw InvariantError("duplicate individual id in survival pool");
    }

    SurvivalResult out;
    out.population.iteration = iteration;
    const auto n = static_cast<std::size_t>(cfg.population_size);
    if (pool.size() <= n) {
        out.shortfall = static_cast<int>(n - pool.size());
        for (auto* p : pool) out.population.members.push_back(*p);
        return out;
    }

    const auto elites = static_cast<std::size_t>(cfg.elite_count);
    std::vector<const Member*> chosen(pool.begin(), pool.begin() + static_cast<long>(elites));
    std::vector<const Member*> rest(pool.begin() + static_cast<long>(elites), pool.end());

    std::vector<double> dmin(rest.size(), std::numeric_limits<double>::infinity());
    auto update_dmin = [&](const Member& picked) {
        for (std::size_t i = 0; i < rest.size(); ++i)
            if (rest[i]) dmin[i] = std::min(dmin[i], pairwise_distance(rest[i]->fitness, picked.fitness));
    };
    for (auto* e : chosen) update_dmin(*e);

    while (chosen.size() < n) {
        std::vector<double> w(rest.size(), 0.0);
        for (std::size_t i = 0; i < rest.size(); ++i) {
            if (!rest[i]) continue;
            // With no elites the first draw has no reference set; use the floor alone.
            const double d = std::isfinite(dmin[i]) ? dmin[i] : 0.0;
            w[i] = std::exp(cfg.beta * rest[i]->mean()) * (d + cfg.epsilon);
        }
        const std::size_t k = rng.weighted(w);
        chosen.push_back(rest[k]);
        rest[k] = nullptr;
        update_dmin(*chosen.back());
    }
    std::sort(chosen.begin(), chosen.end(), [](const Member* a, const Member* b) { return ranks_ahead(*a, *b); });
    for (auto* c : chosen) out.population.members.push_back(*c);
    return out;
}

Generator::Generator(llm::Gateway& gateway, ProblemDescription desc, int max_retries)
    : gateway_(gateway), desc_(std::move(desc)), max_retries_(max_retries) {}

std::string Generator::make_id(int iteration, Operator op, int ordinal) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "g%03d-%s-%02d", iteration, std::string(to_string(op)).c_str(), ordinal);
    return buf;
}

std::vector<llm::Message> Generator::messages_for(Operator op, std::span<const Member* const> parents,
                                                  const MemberRenderer& render) const {
    const std::string system =
        prompts::substitute(prompts::raw("generator_system.txt"), {{"template_heuristic", desc_.skeleton_summary}});
    std::string user;
    switch (op) {
        case Operator::i1:
            user = std::string(prompts::raw("op_i1.txt"));
            break;
        case Operator::e1:
        case Operator::e2:
            if (parents.size() != 2) throw UsageError("crossover needs two parents");
            user = prompts::substitute(prompts::raw(op == Operator::e1 ? "op_e1.txt" : "op_e2.txt"),
                                       {{"Individual 1", render(*parents[0])}, {"Individual 2", render(*parents[1])}});
            break;
        case Operator::m1:
            if (parents.size() != 1) throw UsageError("mutation needs one parent");
            user = prompts::substitute(prompts::raw("op_m1.txt"), {{"Individual", render(*parents[0])}});
            break;
    }
    return {{"system", system}, {"user", user}};
}

std::optional<HeuristicIndividual> Generator::ask(int iteration, Operator op, int ordinal,
                                                  const std::vector<llm::Message>& messages,
                                                  std::vector<std::string>* events) {
    const std::string base = std::to_string(iteration) + "/generator/" + std::string(to_string(op)) + "/" +
                             std::to_string(ordinal);
    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
        const std::string tag = attempt == 0 ? base : base + "r" + std::to_string(attempt);
        const auto resp = gateway_.complete(tag, messages);
        try {
            auto ex = extract_code(resp.content);
            HeuristicIndividual ind;
            ind.id = make_id(iteration, op, ordinal);
            ind.cons_code = std::move(ex.cons_code);
            ind.ref_code = std::move(ex.ref_code);
            ind.source = std::move(ex.code);
            ind.description = std::move(ex.description);
            ind.parse_warning = ex.description_missing;
            ind.op = op;
            ind.iteration_born = iteration;
            if (events && ind.parse_warning) events->push_back(tag + ": no braced description; accepted with warning");
            return ind;
        } catch (const ParseError& e) {
            if (events) events->push_back(tag + ": unparseable response (" + e.what() + ")");
        }
    }
    if (events) events->push_back(base + ": skipped after " + std::to_string(max_retries_ + 1) + " unparseable responses");
    return std::nullopt;
}

std::vector<HeuristicIndividual> Generator::init_population(int count, std::vector<std::string>* events) {
    if (count < 1) throw UsageError("init_population needs count >= 1");
    const auto messages = messages_for(Operator::i1, {}, {});
    std::vector<HeuristicIndividual> out;
    for (int k = 0; k < count; ++k)
        if (auto ind = ask(0, Operator::i1, k, messages, events)) out.push_back(std::move(*ind));
    if (out.empty())
        throw FatalStartupError("none of the " + std::to_string(count) +
                                " initialization responses contained a parseable heuristic");
    return out;
}

std::optional<HeuristicIndividual> Generator::apply_operator(int iteration, Operator op, int ordinal,
                                                             std::span<const Member* const> parents,
                                                             const MemberRenderer& render,
                                                             std::vector<std::string>* events) {
    auto child = ask(iteration, op, ordinal, messages_for(op, parents, render), events);
    if (child)
        for (const Member* p : parents) child->parent_ids.push_back(p->individual.id);
    return child;
}

}  // namespace lago
