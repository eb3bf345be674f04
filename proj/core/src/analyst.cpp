#include "lago/analyst.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "lago/error.hpp"
#include "lago/format.hpp"
#include "lago/prompts.hpp"
#include "lago/sandbox.hpp"

namespace lago {

std::string_view to_string(FeatureStatus s) noexcept {
    switch (s) {
        case FeatureStatus::active: return "active";
        case FeatureStatus::failed: return "failed";
        case FeatureStatus::repaired: return "repaired";
    }
    return "?";
}

FeatureStatus feature_status_from_string(std::string_view s) {
    if (s == "active") return FeatureStatus::active;
    if (s == "failed") return FeatureStatus::failed;
    if (s == "repaired") return FeatureStatus::repaired;
    throw ParseError("unknown feature status '" + std::string(s) + "'");
}

namespace {

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string strip(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string unfence(std::string_view response) {
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
        out += strip(response.substr(body + 1, end - body - 1));
        if (close == std::string_view::npos) break;
        pos = close + 3;
    }
    return out.empty() ? strip(response) : out;
}

}  // namespace

std::optional<FeatureSet> parse_feature_code(std::string_view response, int max_features, std::string* why) {
    auto fail = [&](std::string reason) -> std::optional<FeatureSet> {
        if (why) *why = std::move(reason);
        return std::nullopt;
    };
    FeatureSet fs;
    fs.source = unfence(response);
    const std::string_view src = fs.source;

    std::size_t at = std::string_view::npos;
    for (auto p = src.find("feature_func_list"); p != std::string_view::npos; p = src.find("feature_func_list", p + 1)) {
        std::size_t q = p + std::string_view("feature_func_list").size();
        while (q < src.size() && src[q] == ' ') ++q;
        if (q < src.size() && src[q] == ':') {  // annotated assignment
            q = src.find('=', q);
            if (q == std::string_view::npos) continue;
        }
        if (q < src.size() && src[q] == '=' && (q + 1 >= src.size() || src[q + 1] != '=')) at = q + 1;
    }
    if (at == std::string_view::npos) return fail("no `feature_func_list = [...]` assignment");
    const auto open = src.find_first_not_of(" \t", at);
    if (open == std::string_view::npos || src[open] != '[') return fail("feature_func_list is not a list literal");
    // Collect the list body with `#` comments dropped.
    std::string clean;
    std::size_t i = open + 1;
    for (; i < src.size() && src[i] != ']'; ++i) {
        if (src[i] == '#') {
            while (i < src.size() && src[i] != '\n') ++i;
            if (i == src.size()) break;
        }
        clean += src[i];
    }
    if (i >= src.size()) return fail("unterminated feature_func_list");

    const std::string_view body = clean;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        auto comma = body.find(',', pos);
        if (comma == std::string_view::npos) comma = body.size();
        const std::string item = strip(body.substr(pos, comma - pos));
        if (!item.empty()) {
            if (!is_identifier(item)) return fail("feature_func_list entry '" + item + "' is not a function name");
            fs.names.push_back(item);
        }
        pos = comma + 1;
    }
    if (fs.names.empty()) return fail("feature_func_list is empty");
    if (static_cast<int>(fs.names.size()) > max_features)
        return fail("feature_func_list names " + std::to_string(fs.names.size()) + " functions, more than " +
                    std::to_string(max_features));
    return fs;
}

bool FeatureMatrix::needs_repair() const {
    if (whole_set_failed) return true;
    for (std::size_t f = 0; f < names.size(); ++f) {
        int tried = 0;
        int errored = 0;
        for (const auto& row : rows) {
            const auto& cell = row[f];
            if (cell.absent_reason == "no_solution") continue;
            ++tried;
            if (!cell.value && cell.absent_reason != "non_finite") ++errored;
        }
        if (tried > 0 && errored == tried) return true;
    }
    return false;
}

Analyst::Analyst(llm::Gateway& gateway, ProblemDescription desc, std::string template_analyst_code,
                 AnalystSettings settings)
    : gateway_(gateway),
      desc_(std::move(desc)),
      template_analyst_code_(std::move(template_analyst_code)),
      settings_(std::move(settings)) {}

std::vector<llm::Message> Analyst::propose_messages(const FeatureSet* previous, const SemanticGradient& best,
                                                    std::span<const double> best_costs, bool improved) const {
    const std::string system = prompts::substitute(
        prompts::raw("analyst_system.txt"),
        {{"problem_description", desc_.text}, {"template_analyst_code", template_analyst_code_}});
    std::string costs = "[";
    for (std::size_t i = 0; i < best_costs.size(); ++i) {
        if (i) costs += ", ";
        costs += format_sig4(best_costs[i]);
    }
    costs += "]";
    const std::string user = prompts::substitute(
        prompts::raw("analyst_user.txt"),
        {{"history_feature_code", previous ? previous->source : std::string("None")},
         {"current_best_heuristic_feature", render_performance_summary(best)},
         {"current_best_heuristic_training_cost", costs},
         {"improvement_note", std::string(prompts::raw(improved ? "analyst_improved.txt" : "analyst_not_improved.txt"))}});
    return {{"system", system}, {"user", user}};
}

std::vector<llm::Message> Analyst::repair_messages(const FeatureSet& fs, const std::string& traceback) const {
    const std::string system = prompts::substitute(
        prompts::raw("analyst_system.txt"),
        {{"problem_description", desc_.text}, {"template_analyst_code", template_analyst_code_}});
    const std::string user = prompts::substitute(
        prompts::raw("analyst_repair.txt"),
        {{"past_feature_code", fs.source}, {"best_individual_analysis_traceback_errors", traceback}});
    return {{"system", system}, {"user", user}};
}

std::optional<FeatureSet> Analyst::ask(const std::string& base_tag, int attempts,
                                       const std::vector<llm::Message>& messages, int iteration,
                                       FeatureStatus status, std::vector<std::string>* events) {
    for (int attempt = 0; attempt < attempts; ++attempt) {
        const std::string tag = attempt == 0 ? base_tag : base_tag + "r" + std::to_string(attempt);
        const auto resp = gateway_.complete(tag, messages);
        std::string why;
        if (auto fs = parse_feature_code(resp.content, settings_.max_features, &why)) {
            fs->iteration = iteration;
            fs->status = status;
            return fs;
        }
        if (events) events->push_back(tag + ": unparseable feature code (" + why + ")");
    }
    return std::nullopt;
}

std::optional<FeatureSet> Analyst::propose_features(int iteration, const FeatureSet* previous,
                                                    const SemanticGradient& best, std::span<const double> best_costs,
                                                    bool improved, std::vector<std::string>* events) {
    const std::string base = std::to_string(iteration) + "/analyst/propose/0";
    auto fs = ask(base, settings_.max_retries + 1, propose_messages(previous, best, best_costs, improved), iteration,
                  FeatureStatus::active, events);
    if (!fs && events) events->push_back(base + ": analyst unavailable this iteration");
    return fs;
}

std::optional<FeatureSet> Analyst::repair_features(int iteration, int round, const FeatureSet& fs,
                                                   const std::string& traceback, std::vector<std::string>* events) {
    if (fs.status != FeatureStatus::failed) throw UsageError("repair_features needs a failed feature set");
    if (traceback.empty()) throw UsageError("repair_features needs a non-empty traceback");
    const std::string base = std::to_string(iteration) + "/analyst/repair/" + std::to_string(round);
    return ask(base, 1, repair_messages(fs, traceback), iteration, FeatureStatus::repaired, events);
}

FeatureMatrix Analyst::run_features(const FeatureSet& fs, std::span<const FeaturePair> pairs) const {
    if (pairs.empty()) throw UsageError("run_features over zero pairs");
    FeatureMatrix fm;
    fm.names = fs.names;
    fm.rows.assign(pairs.size(), std::vector<FeatureCell>(fs.names.size()));
    std::vector<std::string> tracebacks(pairs.size());
    std::vector<char> whole_failure(pairs.size(), 0);
    const double timeout = settings_.feature_timeout_s * static_cast<double>(fs.names.size()) + sandbox::kGraceSeconds;

    auto run_pair = [&](sandbox::Client& client, std::size_t i) {
        auto& row = fm.rows[i];
        const auto& pair = pairs[i];
        if (!pair.solution) {
            for (auto& c : row) c.absent_reason = "no_solution";
            return;
        }
        sandbox::FeaturesReply reply;
        try {
            reply = client.features(fs.source, pair.instance->to_wire(), *pair.solution, timeout);
        } catch (const ProtocolError&) {
            throw;
        } catch (const Error& e) {
            reply.outcome = sandbox::Outcome::crash;
            reply.traceback = e.what();
        }
        if (reply.outcome != sandbox::Outcome::ok) {
            const std::string reason = reply.outcome == sandbox::Outcome::timeout ? "timeout"
                                       : reply.outcome == sandbox::Outcome::crash ? "crash"
                                                                                   : "error";
            for (auto& c : row) c.absent_reason = reason;
            tracebacks[i] = reply.traceback.empty() ? "feature evaluation failed (" + reason + ")" : reply.traceback;
            // A timeout affects one pair; load errors and crashes condemn the whole set.
            whole_failure[i] = reply.outcome != sandbox::Outcome::timeout;
            return;
        }
        for (std::size_t f = 0; f < fs.names.size(); ++f) {
            const auto it = std::find(reply.names.begin(), reply.names.end(), fs.names[f]);
            if (it == reply.names.end()) {
                row[f].absent_reason = "missing";
                continue;
            }
            const auto k = static_cast<std::size_t>(it - reply.names.begin());
            if (auto err = reply.errors.find(fs.names[f]); err != reply.errors.end()) {
                row[f].absent_reason = "error";
                if (tracebacks[i].empty()) tracebacks[i] = fs.names[f] + ": " + err->second;
            } else if (k >= reply.values.size() || !reply.values[k]) {
                row[f].absent_reason = "non_finite";
            } else {
                row[f].value = reply.values[k];
            }
        }
    };

    // Pairs are striped across workers; each worker owns one harness.
    const std::size_t workers = std::clamp<std::size_t>(settings_.workers, 1, pairs.size());
    parallel_for(workers, static_cast<unsigned>(workers), [&](std::size_t w) {
        sandbox::Client client(settings_.harness_command);
        for (std::size_t i = w; i < pairs.size(); i += workers) run_pair(client, i);
        client.shutdown();
    });
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (whole_failure[i]) fm.whole_set_failed = true;
        if (fm.first_traceback.empty() && !tracebacks[i].empty()) fm.first_traceback = truncate_error(tracebacks[i]);
    }
    return fm;
}

Analyst::Analysis Analyst::analyze(int iteration, const FeatureSet* previous, const SemanticGradient& best,
                                   std::span<const double> best_costs, bool improved,
                                   std::span<const std::vector<FeaturePair>> groups, std::vector<std::string>* events) {
    auto note = [&](std::string s) {
        if (events) events->push_back(std::to_string(iteration) + "/analyst: " + std::move(s));
    };
    auto run_checked = [&](const FeatureSet& fs, std::string& traceback) -> std::optional<std::vector<FeatureMatrix>> {
        std::vector<FeaturePair> flat;
        for (const auto& g : groups) flat.insert(flat.end(), g.begin(), g.end());
        if (flat.empty()) return std::vector<FeatureMatrix>{};
        FeatureMatrix all = run_features(fs, flat);
        if (all.needs_repair()) {
            traceback = all.first_traceback.empty() ? "feature functions produced no values" : all.first_traceback;
            return std::nullopt;
        }
        std::vector<FeatureMatrix> out;
        std::size_t offset = 0;
        for (const auto& g : groups) {
            FeatureMatrix m;
            m.names = all.names;
            m.first_traceback = all.first_traceback;
            m.rows.assign(all.rows.begin() + static_cast<long>(offset),
                          all.rows.begin() + static_cast<long>(offset + g.size()));
            offset += g.size();
            out.push_back(std::move(m));
        }
        return out;
    };

    Analysis result;
    auto fs = propose_features(iteration, previous, best, best_costs, improved, events);
    if (fs) {
        std::string traceback;
        for (int round = 0;; ++round) {
            if (auto matrices = run_checked(*fs, traceback)) {
                result.features = std::move(*fs);
                result.matrices = std::move(*matrices);
                return result;
            }
            fs->status = FeatureStatus::failed;
            note("feature set failed: " + traceback.substr(0, traceback.find('\n')));
            if (round >= settings_.max_repairs) break;
            auto repaired = repair_features(iteration, round, *fs, traceback, events);
            if (!repaired) {
                if (round + 1 >= settings_.max_repairs) break;
                continue;  // the failed set stays; try another repair
            }
            fs = std::move(repaired);
        }
        note("repairs exhausted; reverting to the previous feature set");
    }
    if (previous) {
        std::string traceback;
        if (auto matrices = run_checked(*previous, traceback)) {
            result.features = *previous;
            result.matrices = std::move(*matrices);
            return result;
        }
        note("previous feature set failed too; gradients carry fitness only");
    }
    return result;
}

SemanticGradient assemble_gradient(const FitnessVector& fv, const FeatureMatrix* fm, const ExecutionTrace& trace) {
    if (fm && fm->rows.size() != fv.size())
        throw UsageError("feature matrix has " + std::to_string(fm->rows.size()) + " rows for " +
                         std::to_string(fv.size()) + " fitness entries");
    if (trace.records.size() != fv.size()) throw UsageError("trace and fitness vector lengths differ");

    SemanticGradient g;
    g.mean_fitness = mean_fitness(fv);
    g.error_msg = trace.first_error();

    std::size_t best = 0;
    std::size_t worst = 0;
    for (std::size_t i = 1; i < fv.size(); ++i) {
        if (fv[i] > fv[best]) best = i;
        if (fv[i] < fv[worst]) worst = i;
    }
    auto profile = [&](std::size_t i) {
        InstanceProfile p;
        p.instance_id = trace.records[i].instance;
        p.fitness = fv[i];
        if (fm)
            for (const auto& cell : fm->rows[i]) p.features.push_back(cell.value);
        return p;
    };

    if (fm) {
        g.feature_names = fm->names;
        for (std::size_t f = 0; f < fm->names.size(); ++f) {
            double lo = 0.0, hi = 0.0, sum = 0.0;
            std::size_t n = 0;
            for (const auto& row : fm->rows) {
                const auto& v = row[f].value;
                if (!v || !std::isfinite(*v)) continue;
                lo = n == 0 ? *v : std::min(lo, *v);
                hi = n == 0 ? *v : std::max(hi, *v);
                sum += *v;
                ++n;
            }
            if (n == 0) {
                g.stats.push_back(std::nullopt);
            } else {
                // Clamp guards the bracket invariant against summation rounding.
                const double mean = std::clamp(sum / static_cast<double>(n), lo, hi);
                g.stats.push_back(FeatureStats{lo, hi, mean});
            }
        }
    }
    g.best_instance = profile(best);
    g.worst_instance = profile(worst);
    return g;
}

std::string render_performance_summary(const SemanticGradient& g) {
    std::string out;
    for (std::size_t f = 0; f < g.feature_names.size(); ++f) {
        const auto& s = g.stats[f];
        out += "- " + g.feature_names[f] + ": Avg=" + format_sig4(s ? std::optional(s->mean) : std::nullopt) +
               ", Range=[" + format_sig4(s ? std::optional(s->min) : std::nullopt) + ", " +
               format_sig4(s ? std::optional(s->max) : std::nullopt) + "]\n";
    }
    if (!g.feature_names.empty()) out += "\n";
    auto instance_line = [](const char* label, const std::optional<InstanceProfile>& p) {
        if (!p) return std::string("- ") + label + " Instance (n/a): Fitness=n/a, Features=[]\n";
        return std::string("- ") + label + " Instance (" + p->instance_id + "): Fitness=" + format_sig4(p->fitness) +
               ", Features=" + format_sig4_list(p->features) + "\n";
    };
    out += instance_line("Worst", g.worst_instance);
    out += "\n";
    out += instance_line("Best", g.best_instance);
    return out;
}

std::string render_individual(const HeuristicIndividual& ind, const SemanticGradient& g, double avg_objective) {
    const std::string& code = ind.source.empty() ? ind.cons_code + "\n\n" + ind.ref_code : ind.source;
    std::string out;
    out += "Response at iteration " + std::to_string(ind.iteration_born) + "\n\n";
    out += "code=" + code + "\n\n";
    out += "text_description=\"\"\"" + ind.description + "\"\"\"\n\n";
    out += "avg_objective " + format_sig4(avg_objective) + "\n\n";
    out += "error_msg='" + g.error_msg + "'\n\n";
    out += "Performance Summary:\n\n";
    out += render_performance_summary(g);
    return out;
}

}  // namespace lago
