#include "lago/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "lago/error.hpp"
#include "lago/format.hpp"
#include "lago/prompts.hpp"
#include "lago/rng.hpp"
#include "lago/serialization.hpp"

namespace lago {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- config

void RunConfig::check() const {
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("split_ratio must lie strictly between 0 and 1");
    if (!(penalty > 0.0)) throw ConfigError("penalty must be positive");
    if (instance_dir.empty()) throw ConfigError("instance_dir is required");
    if (registry_path.empty()) throw ConfigError("registry is required");
    if (harness_command.empty()) throw ConfigError("harness_command must not be empty");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (max_features < 1) throw ConfigError("analyst.max_features must be >= 1");
    if (!(feature_timeout_s > 0.0)) throw ConfigError("analyst.feature_timeout_s must be positive");
    if (max_repairs < 0) throw ConfigError("analyst.max_repairs must be >= 0");
    if (max_retries < 0) throw ConfigError("llm.max_retries must be >= 0");
    if (backend == llm::Backend::replay && replay_log.empty())
        throw ConfigError("replay backend needs replay_log");
    schedule.check();
    survival.check();
    budget.check();
}

namespace {

std::string resolve(const std::string& p, const std::string& base) {
    if (p.empty()) return p;
    const fs::path path(p);
    if (path.is_absolute()) return path.lexically_normal().string();
    return fs::absolute(fs::path(base) / path).lexically_normal().string();
}

template <class T>
void take(const json& obj, const char* key, T& out, std::set<std::string>& seen, const std::string& scope) {
    seen.insert(key);
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + scope + key + "' has the wrong type");
    }
}

void reject_unknown(const json& obj, const std::set<std::string>& seen, const std::string& scope) {
    for (const auto& [k, v] : obj.items())
        if (!seen.count(k)) throw ConfigError("unknown config key '" + scope + k + "'");
}

json object_or_empty(const json& doc, const char* key) {
    if (!doc.contains(key)) return json::object();
    if (!doc.at(key).is_object()) throw ConfigError(std::string("config key '") + key + "' must be an object");
    return doc.at(key);
}

}  // namespace

RunConfig RunConfig::from_json(const json& doc, const std::string& base_dir) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    std::set<std::string> seen;
    std::string env = std::string(to_string(c.env));
    std::string backend = c.backend == llm::Backend::live ? "live" : "replay";
    take(doc, "env", env, seen, "");
    take(doc, "instance_dir", c.instance_dir, seen, "");
    take(doc, "registry", c.registry_path, seen, "");
    take(doc, "iterations", c.iterations, seen, "");
    take(doc, "penalty", c.penalty, seen, "");
    take(doc, "analyst_enabled", c.analyst_enabled, seen, "");
    take(doc, "backend", backend, seen, "");
    take(doc, "replay_log", c.replay_log, seen, "");
    take(doc, "master_seed", c.master_seed, seen, "");
    take(doc, "split_ratio", c.split_ratio, seen, "");
    take(doc, "split_seed", c.split_seed, seen, "");
    take(doc, "harness_command", c.harness_command, seen, "");
    take(doc, "workers", c.workers, seen, "");

    const json sched = object_or_empty(doc, "schedule");
    seen.insert("schedule");
    std::set<std::string> s2;
    take(sched, "init", c.schedule.init_count, s2, "schedule.");
    take(sched, "e1", c.schedule.e1, s2, "schedule.");
    take(sched, "e2", c.schedule.e2, s2, "schedule.");
    take(sched, "m1", c.schedule.m1, s2, "schedule.");
    reject_unknown(sched, s2, "schedule.");

    const json surv = object_or_empty(doc, "survival");
    seen.insert("survival");
    std::set<std::string> s3;
    take(surv, "population_size", c.survival.population_size, s3, "survival.");
    take(surv, "elite_count", c.survival.elite_count, s3, "survival.");
    take(surv, "beta", c.survival.beta, s3, "survival.");
    take(surv, "epsilon", c.survival.epsilon, s3, "survival.");
    reject_unknown(surv, s3, "survival.");

    const json bud = object_or_empty(doc, "budget");
    seen.insert("budget");
    std::set<std::string> s4;
    take(bud, "lns_iterations", c.budget.lns_iterations, s4, "budget.");
    take(bud, "time_limit_s", c.budget.time_limit_s, s4, "budget.");
    reject_unknown(bud, s4, "budget.");

    const json an = object_or_empty(doc, "analyst");
    seen.insert("analyst");
    std::set<std::string> s5;
    take(an, "max_features", c.max_features, s5, "analyst.");
    take(an, "feature_timeout_s", c.feature_timeout_s, s5, "analyst.");
    take(an, "max_repairs", c.max_repairs, s5, "analyst.");
    reject_unknown(an, s5, "analyst.");

    const json llm = object_or_empty(doc, "llm");
    seen.insert("llm");
    std::set<std::string> s6;
    take(llm, "model", c.model, s6, "llm.");
    take(llm, "temperature", c.temperature, s6, "llm.");
    take(llm, "completion_token_ceiling", c.completion_token_ceiling, s6, "llm.");
    take(llm, "max_retries", c.max_retries, s6, "llm.");
    s6.insert("reasoning_effort");
    if (llm.contains("reasoning_effort")) {
        const auto& r = llm.at("reasoning_effort");
        if (r.is_null())
            c.reasoning_effort.reset();
        else if (r.is_string())
            c.reasoning_effort = r.get<std::string>();
        else
            throw ConfigError("config key 'llm.reasoning_effort' must be a string or null");
    }
    reject_unknown(llm, s6, "llm.");
    reject_unknown(doc, seen, "");

    try {
        c.env = env_from_string(env);
    } catch (const Error&) {
        throw ConfigError("config key 'env' must be pdptw or tsp, got '" + env + "'");
    }
    if (backend == "live")
        c.backend = llm::Backend::live;
    else if (backend == "replay")
        c.backend = llm::Backend::replay;
    else
        throw ConfigError("config key 'backend' must be live or replay, got '" + backend + "'");

    c.instance_dir = resolve(c.instance_dir, base_dir);
    c.registry_path = resolve(c.registry_path, base_dir);
    c.replay_log = resolve(c.replay_log, base_dir);
    if (!c.harness_command.empty() && c.harness_command.front().find('/') != std::string::npos)
        c.harness_command.front() = resolve(c.harness_command.front(), base_dir);
    c.check();
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    json doc;
    try {
        doc = read_json_file(path);
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
    return from_json(doc, fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string());
}

json RunConfig::to_json() const {
    return json{{"env", std::string(lago::to_string(env))},
                {"instance_dir", instance_dir},
                {"registry", registry_path},
                {"iterations", iterations},
                {"penalty", penalty},
                {"analyst_enabled", analyst_enabled},
                {"backend", backend == llm::Backend::live ? "live" : "replay"},
                {"replay_log", replay_log},
                {"master_seed", master_seed},
                {"split_ratio", split_ratio},
                {"split_seed", split_seed},
                {"harness_command", harness_command},
                {"workers", workers},
                {"schedule", {{"init", schedule.init_count}, {"e1", schedule.e1}, {"e2", schedule.e2}, {"m1", schedule.m1}}},
                {"survival",
                 {{"population_size", survival.population_size},
                  {"elite_count", survival.elite_count},
                  {"beta", survival.beta},
                  {"epsilon", survival.epsilon}}},
                {"budget", {{"lns_iterations", budget.lns_iterations}, {"time_limit_s", budget.time_limit_s}}},
                {"analyst",
                 {{"max_features", max_features}, {"feature_timeout_s", feature_timeout_s}, {"max_repairs", max_repairs}}},
                {"llm",
                 {{"model", model},
                  {"temperature", temperature},
                  {"reasoning_effort", reasoning_effort ? json(*reasoning_effort) : json(nullptr)},
                  {"completion_token_ceiling", completion_token_ceiling},
                  {"max_retries", max_retries}}}};
}

// ---------------------------------------------------------------- split

Split split_dataset(std::vector<std::string> names, double ratio, std::uint64_t seed) {
    if (names.size() < 2) throw UsageError("split_dataset needs at least two instances");
    if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("split ratio must lie strictly between 0 and 1");
    std::sort(names.begin(), names.end());
    Rng rng(derive_seed(seed, "split"));
    for (std::size_t i = names.size() - 1; i > 0; --i) std::swap(names[i], names[rng.below(i + 1)]);
    const auto n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(names.size()) - 1e-9));
    Split s;
    s.train.assign(names.begin(), names.begin() + static_cast<long>(n_train));
    s.test.assign(names.begin() + static_cast<long>(n_train), names.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

// ---------------------------------------------------------------- run

namespace {

/// Serves tags already present in the run's own log and records the rest.
class CachingBackend : public llm::ChatBackend {
public:
    CachingBackend(std::map<std::string, llm::LogEntry> cached, std::unique_ptr<llm::ChatBackend> inner,
                   std::string log_path)
        : cached_(std::move(cached)), inner_(std::move(inner)), log_(std::move(log_path)) {}

    llm::ChatResponse complete(const llm::ChatRequest& req) override {
        if (auto it = cached_.find(req.tag); it != cached_.end()) {
            auto r = it->second.response;
            r.backend = llm::Backend::replay;
            return r;
        }
        auto r = inner_->complete(req);
        log_.append(req, r);
        return r;
    }

private:
    std::map<std::string, llm::LogEntry> cached_;
    std::unique_ptr<llm::ChatBackend> inner_;
    llm::CallLog log_;
};

std::string iter_dir(const std::string& out, int k) { return (fs::path(out) / ("iter_" + std::to_string(k))).string(); }

std::vector<int> completed_iterations(const std::string& out) {
    std::vector<int> ks;
    if (!fs::is_directory(out)) return ks;
    for (const auto& e : fs::directory_iterator(out)) {
        const std::string name = e.path().filename().string();
        if (!e.is_directory() || name.rfind("iter_", 0) != 0) continue;
        const std::string digits = name.substr(5);
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) continue;
        if (fs::exists(e.path() / "population.json")) ks.push_back(std::stoi(digits));
    }
    std::sort(ks.begin(), ks.end());
    return ks;
}

std::vector<ExecutionTrace> load_traces(const std::string& path) {
    const json doc = read_json_file(path);
    if (!doc.is_array()) throw ParseError(path + ": expected an array of traces");
    return doc.get<std::vector<ExecutionTrace>>();
}

std::vector<ProblemInstance> pick(const std::vector<ProblemInstance>& all, const std::vector<std::string>& names) {
    std::vector<ProblemInstance> out;
    for (const auto& n : names)
        for (const auto& inst : all)
            if (inst.name() == n) out.push_back(inst);
    return out;
}

class Loop {
public:
    Loop(const RunConfig& cfg, const std::string& out, llm::Gateway& gateway, const BestKnownRegistry& registry,
         std::vector<ProblemInstance> train)
        : cfg_(cfg),
          out_(out),
          train_(std::move(train)),
          desc_(prompts::problem_description(cfg.env)),
          generator_(gateway, desc_, cfg.max_retries),
          analyst_(gateway, desc_, std::string(prompts::template_analyst_code(cfg.env)),
                   AnalystSettings{cfg.max_features, cfg.feature_timeout_s, cfg.max_retries, cfg.max_repairs,
                                   cfg.workers, cfg.harness_command}),
          evaluator_(EvalSettings{cfg.harness_command, cfg.budget, cfg.penalty, cfg.workers}, registry) {}

    void resume(int k) {
        if (k >= 1) {
            const auto prev = population_from_json(read_json_file(iter_dir(out_, k - 1) + "/population.json"));
            previous_elite_ = prev.population.best().mean();
        }
        const auto doc = population_from_json(read_json_file(iter_dir(out_, k) + "/population.json"));
        pop_ = doc.population;
        features_ = doc.features;
        for (auto& t : load_traces(iter_dir(out_, k) + "/traces.json")) traces_[t.individual_id] = std::move(t);
        for (const auto& m : pop_.members)
            if (!traces_.count(m.individual.id))
                throw ParseError(iter_dir(out_, k) + "/traces.json lacks the trace of " + m.individual.id);
    }

    void initialize() {
        std::vector<std::string> events;
        auto inds = generator_.init_population(cfg_.schedule.init_count, &events);
        auto members = evaluate(inds);
        std::vector<Member> none;
        backward(0, none, members, true, events);
        Rng rng(derive_seed(cfg_.master_seed, "survival", 0));
        auto sr = survive({}, members, cfg_.survival, rng, 0);
        note_shortfall(sr, events);
        pop_ = std::move(sr.population);
        pop_.iteration = 0;
        persist(0, members, events);
    }

    void step(int t) {
        std::vector<std::string> events;
        // Improvement is judged on the elites of the last two populations, before any generation.
        const double elite = pop_.best().mean();
        const bool improved = !previous_elite_ || elite - *previous_elite_ > 1e-9;
        Rng sel(derive_seed(cfg_.master_seed, "selection", static_cast<std::uint64_t>(t)));
        const MemberRenderer render = [](const Member& m) {
            return render_individual(m.individual, m.gradient, m.mean());
        };
        std::vector<HeuristicIndividual> inds;
        const std::pair<Operator, int> plan[] = {
            {Operator::e1, cfg_.schedule.e1}, {Operator::e2, cfg_.schedule.e2}, {Operator::m1, cfg_.schedule.m1}};
        for (const auto& [op, count] : plan) {
            for (int k = 0; k < count; ++k) {
                const std::size_t need = op == Operator::m1 ? 1 : 2;
                if (pop_.members.size() < need) {
                    events.push_back(std::to_string(t) + "/generator/" + std::string(to_string(op)) +
                                     ": population too small, skipped");
                    continue;
                }
                const auto idx = select_parents(pop_, op, cfg_.survival, sel);
                std::vector<const Member*> parents;
                for (auto i : idx) parents.push_back(&pop_.members[i]);
                if (auto ind = generator_.apply_operator(t, op, k, parents, render, &events))
                    inds.push_back(std::move(*ind));
            }
        }
        auto candidates = evaluate(inds);
        auto current = pop_.members;
        backward(t, current, candidates, improved, events);
        Rng surv(derive_seed(cfg_.master_seed, "survival", static_cast<std::uint64_t>(t)));
        auto sr = survive(current, candidates, cfg_.survival, surv, t);
        note_shortfall(sr, events);
        pop_ = std::move(sr.population);
        pop_.iteration = t;
        previous_elite_ = elite;
        std::vector<Member> all = current;
        all.insert(all.end(), candidates.begin(), candidates.end());
        persist(t, all, events);
    }

    const Population& population() const { return pop_; }
    const ExecutionTrace& trace_of(const std::string& id) const { return traces_.at(id); }

private:
    std::vector<Member> evaluate(const std::vector<HeuristicIndividual>& inds) {
        auto results = evaluator_.evaluate_all(inds, train_);
        std::vector<Member> members;
        for (std::size_t i = 0; i < inds.size(); ++i) {
            Member m;
            m.individual = inds[i];
            m.fitness = results[i].fitness;
            m.gradient = assemble_gradient(m.fitness, nullptr, results[i].trace);
            traces_[inds[i].id] = std::move(results[i].trace);
            members.push_back(std::move(m));
        }
        return members;
    }

    /// Recomputes every gradient of population ∪ candidates under one feature set.
    void backward(int t, std::vector<Member>& current, std::vector<Member>& candidates,
                  bool improved, std::vector<std::string>& events) {
        std::vector<Member*> all;
        for (auto& m : current) all.push_back(&m);
        for (auto& m : candidates) all.push_back(&m);
        if (all.empty()) return;

        // The analyst studies the current elite, whose gradient carries the previous feature set.
        const std::size_t pool = current.empty() ? all.size() : current.size();
        const Member* best = current.empty() ? all.front() : &current.front();
        for (std::size_t i = 0; i < pool; ++i)
            if (ranks_ahead(*all[i], *best)) best = all[i];
        const SemanticGradient best_gradient = best->gradient;
        std::vector<double> best_costs;
        for (const auto& r : traces_.at(best->individual.id).records)
            best_costs.push_back(r.solution ? r.penalized_cost : std::nan(""));

        for (Member* m : all) m->gradient = assemble_gradient(m->fitness, nullptr, traces_.at(m->individual.id));
        if (!cfg_.analyst_enabled) return;

        std::vector<std::vector<FeaturePair>> groups;
        for (const Member* m : all) {
            const auto& trace = traces_.at(m->individual.id);
            std::vector<FeaturePair> g;
            for (std::size_t i = 0; i < train_.size(); ++i) g.push_back({&train_[i], trace.records[i].solution});
            groups.push_back(std::move(g));
        }
        auto analysis = analyst_.analyze(t, features_ ? &*features_ : nullptr, best_gradient, best_costs, improved,
                                         groups, &events);
        if (!analysis.features) return;
        features_ = std::move(analysis.features);
        for (std::size_t i = 0; i < all.size(); ++i)
            all[i]->gradient =
                assemble_gradient(all[i]->fitness, &analysis.matrices[i], traces_.at(all[i]->individual.id));
    }

    void note_shortfall(const SurvivalResult& sr, std::vector<std::string>& events) const {
        if (sr.shortfall > 0)
            events.push_back("survival: population short by " + std::to_string(sr.shortfall));
    }

    void persist(int k, const std::vector<Member>& evaluated, const std::vector<std::string>& events) {
        json traces = json::array();
        std::set<std::string> written;
        for (const auto& m : evaluated)
            if (written.insert(m.individual.id).second) traces.push_back(traces_.at(m.individual.id));
        const std::string dir = iter_dir(out_, k);
        write_text_file(dir + "/traces.json", dump_document(traces));
        // population.json is written last: its presence marks the iteration complete.
        write_text_file(dir + "/population.json", dump_document(population_to_json({pop_, features_, events})));
        std::map<std::string, ExecutionTrace> kept;
        for (const auto& m : pop_.members) kept[m.individual.id] = traces_.at(m.individual.id);
        traces_ = std::move(kept);
    }

    const RunConfig& cfg_;
    std::string out_;
    std::vector<ProblemInstance> train_;
    ProblemDescription desc_;
    Generator generator_;
    Analyst analyst_;
    ForwardEvaluator evaluator_;
    Population pop_;
    std::optional<FeatureSet> features_;
    std::map<std::string, ExecutionTrace> traces_;
    std::optional<double> previous_elite_;
};

}  // namespace

RunReport run(const RunConfig& cfg, const std::string& out_dir) {
    cfg.check();
    const auto started = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    const std::string out = fs::absolute(out_dir).lexically_normal().string();

    auto instances = load_instance_dir(cfg.env, cfg.instance_dir);
    const auto registry = BestKnownRegistry::load(cfg.registry_path);
    std::vector<std::string> names;
    std::string gaps;
    for (const auto& inst : instances) {
        names.push_back(inst.name());
        if (!registry.contains(inst.name())) gaps += (gaps.empty() ? "" : ", ") + inst.name();
    }
    if (!gaps.empty()) throw ConfigError("best-known registry " + cfg.registry_path + " has no entry for: " + gaps);
    const Split split = split_dataset(names, cfg.split_ratio, cfg.split_seed);
    auto train = pick(instances, split.train);
    auto test = pick(instances, split.test);

    write_text_file(out + "/config.snapshot", dump_document(cfg.to_json()));
    const auto done = completed_iterations(out);
    const int last = done.empty() ? -1 : done.back();

    const std::string log_path = out + "/llm_log.jsonl";
    const bool log_is_source = cfg.backend == llm::Backend::replay && fs::exists(cfg.replay_log) &&
                               fs::exists(log_path) && fs::equivalent(cfg.replay_log, log_path);
    if (last < 0 && !log_is_source && cfg.backend == llm::Backend::replay) fs::remove(log_path);

    llm::TokenUsage prior;
    if (last >= 0 && fs::exists(out + "/run_stats.json")) {
        const auto stats = read_json_file(out + "/run_stats.json");
        prior.prompt = stats.value("prompt_tokens", 0L);
        prior.completion = stats.value("completion_tokens", 0L);
    }

    std::unique_ptr<llm::ChatBackend> backend;
    std::unique_ptr<llm::CallLog> recorder;
    if (cfg.backend == llm::Backend::live) {
        auto live = llm::LiveConfig::from_env();
        if (!live) throw ConfigError("live backend needs LAGO_API_KEY (or OPENAI_API_KEY) in the environment");
        if (!cfg.model.empty()) live->model = cfg.model;
        std::map<std::string, llm::LogEntry> cached;
        if (last >= 0 && fs::exists(log_path)) cached = llm::CallLog::load(log_path);
        if (last < 0) fs::remove(log_path);
        backend = std::make_unique<CachingBackend>(std::move(cached), std::make_unique<llm::LiveBackend>(*live),
                                                   log_path);
    } else {
        backend = llm::ReplayBackend::from_log(cfg.replay_log);
        if (!log_is_source) recorder = std::make_unique<llm::CallLog>(log_path);
    }
    llm::Gateway gateway(std::move(backend),
                         llm::Gateway::Settings{cfg.model, cfg.temperature, cfg.reasoning_effort,
                                                cfg.completion_token_ceiling},
                         std::move(recorder));
    gateway.add_prior_usage(prior);

    auto save_stats = [&] {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        const auto u = gateway.usage();
        write_text_file(out + "/run_stats.json",
                        dump_document(json{{"wall_time_s", elapsed},
                                           {"prompt_tokens", u.prompt},
                                           {"completion_tokens", u.completion}}));
        return elapsed;
    };

    Loop loop(cfg, out, gateway, registry, train);
    if (last < 0)
        loop.initialize();
    else
        loop.resume(last);
    save_stats();
    std::string aborted;
    try {
        for (int t = std::max(last + 1, 1); t <= cfg.iterations; ++t) {
            loop.step(t);
            save_stats();
        }
    } catch (const BudgetExhaustedError& e) {
        aborted = e.what();
    }

    const std::string final_path = out + "/final/test_traces.json";
    if (aborted.empty() && !fs::exists(final_path)) {
        json traces = json::array();
        if (!test.empty()) {
            ForwardEvaluator ev(EvalSettings{cfg.harness_command, cfg.budget, cfg.penalty, cfg.workers}, registry);
            traces.push_back(ev.evaluate(loop.population().best().individual, test).trace);
        }
        write_text_file(final_path, dump_document(traces));
    }
    const double elapsed = save_stats();

    RunReport rep = report(out);
    rep.aborted = aborted;
    if (!aborted.empty()) {
        rep.markdown += "\n## Aborted\n\n" + aborted + "\n";
        write_text_file(out + "/report.md", rep.markdown);
    }
    rep.wall_time_s = elapsed;
    rep.usage = gateway.usage();
    return rep;
}

// ---------------------------------------------------------------- report

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '|', '/');
    return s;
}

void gap_rows(std::string& md, const char* split, const ExecutionTrace& trace, const BestKnownRegistry& registry) {
    for (const auto& r : trace.records) {
        const double best = registry.at(r.instance);
        md += std::string("| ") + split + " | " + r.instance + " | ";
        if (!r.feasible) {
            md += "infeasible | " + format_shortest(best) + " | n/a |\n";
            continue;
        }
        const double gap = best > 0.0 ? (r.raw_cost - best) / best * 100.0 : 0.0;
        md += format_shortest(r.raw_cost) + " | " + format_shortest(best) + " | " + fixed(gap, 2) + "% |\n";
    }
}

}  // namespace

RunReport report(const std::string& run_dir) {
    const std::string dir = fs::path(run_dir).lexically_normal().string();
    std::vector<std::string> missing;
    const std::string snapshot = dir + "/config.snapshot";
    if (!fs::exists(snapshot)) missing.push_back("config.snapshot");
    const auto done = completed_iterations(dir);
    if (done.empty()) missing.push_back("iter_0/population.json");
    for (int k : done)
        if (!fs::exists(iter_dir(dir, k) + "/traces.json")) missing.push_back("iter_" + std::to_string(k) + "/traces.json");
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw ConfigError("run directory " + dir + " is missing: " + list);
    }

    const RunConfig cfg = RunConfig::from_json(read_json_file(snapshot), dir);
    const auto registry = BestKnownRegistry::load(cfg.registry_path);

    RunReport rep;
    ExecutionTrace best_train;
    for (int k : done) {
        const auto doc = population_from_json(read_json_file(iter_dir(dir, k) + "/population.json"));
        if (doc.population.members.empty()) throw ParseError(iter_dir(dir, k) + "/population.json has no members");
        const Member& best = doc.population.best();
        const auto traces = load_traces(iter_dir(dir, k) + "/traces.json");
        const auto it = std::find_if(traces.begin(), traces.end(),
                                     [&](const ExecutionTrace& t) { return t.individual_id == best.individual.id; });
        if (it == traces.end())
            throw ParseError(iter_dir(dir, k) + "/traces.json lacks the trace of " + best.individual.id);
        const auto outcomes = it->outcomes();
        const QualityYield qy = quality_yield(outcomes, registry);
        rep.best = best;
        rep.train = qy;
        best_train = *it;
        if (k == 0) continue;
        double sum = 0.0;
        for (const auto& m : doc.population.members) sum += m.mean();
        rep.rows.push_back({k, best.mean(), sum / static_cast<double>(doc.population.members.size()), qy.index()});
    }

    std::optional<ExecutionTrace> test_trace;
    if (fs::exists(dir + "/final/test_traces.json")) {
        const auto traces = load_traces(dir + "/final/test_traces.json");
        if (!traces.empty()) {
            test_trace = traces.front();
            rep.test = quality_yield(test_trace->outcomes(), registry);
        }
    }

    std::string csv = "iteration,best_internal_fitness,mean_internal_fitness,best_train_qyi\n";
    for (const auto& r : rep.rows)
        csv += std::to_string(r.iteration) + "," + format_shortest(r.best_internal_fitness) + "," +
               format_shortest(r.mean_internal_fitness) + "," + format_shortest(r.best_train_qyi) + "\n";

    const Member& best = *rep.best;
    std::string md;
    md += "# LaGO run report\n\n";
    md += "- Environment: " + std::string(to_string(cfg.env)) + "\n";
    md += "- Iterations completed: " + std::to_string(done.back()) + " of " + std::to_string(cfg.iterations) + "\n";
    md += "- Training instances: " + std::to_string(best.fitness.size()) + "\n";
    md += "- Test instances: " + (test_trace ? std::to_string(test_trace->records.size()) : std::string("n/a")) + "\n\n";

    md += "## Convergence\n\n";
    md += "| iteration | best internal fitness | mean internal fitness | best train QYI |\n";
    md += "|---|---|---|---|\n";
    for (const auto& r : rep.rows)
        md += "| " + std::to_string(r.iteration) + " | " + fixed(r.best_internal_fitness, 6) + " | " +
              fixed(r.mean_internal_fitness, 6) + " | " + fixed(r.best_train_qyi, 6) + " |\n";
    md += "\n## Best individual\n\n";
    md += "- id: " + best.individual.id + "\n";
    md += "- operator: " + std::string(to_string(best.individual.op)) + ", born at iteration " +
          std::to_string(best.individual.iteration_born) + "\n";
    std::string parents;
    for (const auto& p : best.individual.parent_ids) parents += (parents.empty() ? "" : ", ") + p;
    md += "- parents: " + (parents.empty() ? std::string("none") : parents) + "\n";
    md += "- description: " + one_line(best.individual.description) + "\n";
    md += "- mean internal fitness: " + fixed(best.mean(), 6) + "\n\n";

    md += "## Quality and yield\n\n";
    md += "| split | quality | yield | QYI |\n|---|---|---|---|\n";
    md += "| train | " + fixed(rep.train->quality, 6) + " | " + fixed(rep.train->yield, 6) + " | " +
          fixed(rep.train->index(), 6) + " |\n";
    if (rep.test)
        md += "| test | " + fixed(rep.test->quality, 6) + " | " + fixed(rep.test->yield, 6) + " | " +
              fixed(rep.test->index(), 6) + " |\n";
    else
        md += "| test | n/a | n/a | n/a |\n";

    if (cfg.env == EnvKind::tsp) {
        md += "\n## Optimality gap\n\n";
        md += "| split | instance | cost | best known | gap |\n|---|---|---|---|---|\n";
        gap_rows(md, "train", best_train, registry);
        if (test_trace) gap_rows(md, "test", *test_trace, registry);
    }

    md += "\n## Code\n\n```python\n";
    md += best.individual.source.empty() ? best.individual.cons_code + "\n\n" + best.individual.ref_code
                                         : best.individual.source;
    md += "\n```\n";

    write_text_file(dir + "/convergence.csv", csv);
    write_text_file(dir + "/report.md", md);
    rep.markdown = std::move(md);
    return rep;
}

ForwardEvaluator::Result evaluate_module(const RunConfig& cfg, const std::string& module_source,
                                         std::span<const ProblemInstance> instances,
                                         const BestKnownRegistry& registry) {
    const ExtractedCode code = extract_code(module_source);
    HeuristicIndividual ind;
    ind.id = "module";
    ind.cons_code = code.cons_code;
    ind.ref_code = code.ref_code;
    ind.source = code.code;
    ind.description = code.description;
    ForwardEvaluator ev(EvalSettings{cfg.harness_command, cfg.budget, cfg.penalty, cfg.workers}, registry);
    return ev.evaluate(ind, instances);
}

}  // namespace lago
