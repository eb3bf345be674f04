// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lago/error.hpp"
#include "lago/forward_eval.hpp"
#include "lago/generator.hpp"
#include "lago/llm.hpp"
#include "lago/metrics.hpp"
#include "lago/prompts.hpp"
#include "lago/runner.hpp"
#include "lago/serialization.hpp"
#include "support.hpp"

using namespace lago;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    enum Kind { pass, fail, skip } kind = pass;
    std::string detail;
};

Verdict ok(std::string d = "") { return {Verdict::pass, std::move(d)}; }
Verdict bad(std::string d) { return {Verdict::fail, std::move(d)}; }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

json fixture_doc(const std::string& name) {
    std::ifstream in(testing::data_path("fixtures/" + name + "/config.json"));
    json doc = json::parse(in);
    doc["harness_command"] = testing::harness_command();
    return doc;
}

// ------------------------------------------------------------------------

Verdict metrics() {
    auto near = [](double a, double b, double tol) { return std::fabs(a - b) <= tol; };
    if (!near(qyi(0.8, 0.5), 0.8 / 1.3, 1e-12) || !near(qyi(0.8, 0.5), 0.61538, 1e-5))
        return bad("qyi(0.8, 0.5) = " + std::to_string(qyi(0.8, 0.5)));
    if (qyi(1, 1) != 1.0 || qyi(0, 0) != 0.0) return bad("qyi corner cases");
    if (fitness(100, 100) != 1.0 || fitness(100, 200) != 0.5 || fitness(100, 80) != 1.0 || fitness(0, 0) != 1.0)
        return bad("fitness examples");
    if (internal_fitness(100, std::nullopt) != 0.0 || internal_fitness(100, 100100.0) != 100.0 / 100100.0)
        return bad("internal fitness examples");
    const BestKnownRegistry reg({{"a", 10}, {"b", 10}});
    const std::vector<InstanceOutcome> half{{"a", true, 12.5}, {"b", false, 0}};
    const auto qy = quality_yield(half, reg);
    if (qy.quality != 0.8 || qy.yield != 0.5 || !near(qy.index(), 0.61538, 1e-5))
        return bad("quality/yield example");
    return ok();
}

Verdict pdptw_oracle() {
    long candidates = 0;
    for (int k = 0; k < 50; ++k) {
        Rng rng(derive_seed(2024, "acceptance-pdptw", static_cast<std::uint64_t>(k)));
        const int requests = 1 + static_cast<int>(rng.below(3));
        const int vehicles = 1 + static_cast<int>(rng.below(2));
        const auto inst = testing::random_pdptw(rng, requests, vehicles, "acc" + std::to_string(k));
        std::optional<double> best_validator, best_oracle;
        std::string mismatch;
        testing::enumerate_solutions(inst, inst.vehicle_count(), [&](const std::vector<std::vector<int>>& routes) {
            ++candidates;
            const auto o = testing::oracle_check(inst, routes);
            const auto r = pdptw::validate(inst, {routes});
            if (o.feasible != r.feasible && mismatch.empty()) mismatch = "feasibility";
            if (r.feasible && (!best_validator || r.distance < *best_validator)) best_validator = r.distance;
            if (o.feasible && (!best_oracle || o.distance < *best_oracle)) best_oracle = o.distance;
        });
        if (!mismatch.empty()) return bad("instance " + std::to_string(k) + ": " + mismatch + " disagreement");
        if (best_validator.has_value() != best_oracle.has_value() ||
            (best_validator && std::fabs(*best_validator - *best_oracle) > 1e-6))
            return bad("instance " + std::to_string(k) + ": minimum feasible distance differs");
    }
    return ok(std::to_string(candidates) + " candidate assignments");
}

Verdict tsp_oracle() {
    std::vector<ProblemInstance> instances;
    std::map<std::string, double> optimum;
    for (int k = 0; k < 50; ++k) {
        Rng rng(derive_seed(2024, "acceptance-tsp", static_cast<std::uint64_t>(k)));
        auto inst = testing::random_tsp(rng, 7, "city7_" + std::to_string(k));
        optimum[inst.name] = testing::oracle_tsp_optimum(inst);
        instances.emplace_back(std::move(inst));
    }
    const BestKnownRegistry reg(optimum);
    const std::string code(prompts::baseline_code(EnvKind::tsp));
    HeuristicIndividual baseline;
    baseline.id = "baseline";
    baseline.cons_code = code;
    baseline.ref_code = code;
    const ForwardEvaluator ev(EvalSettings{testing::harness_command(), EvalBudget{500, 10.0, 5}, 1e5, 1}, reg);
    const auto r = ev.evaluate(baseline, instances);
    int hits = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& rec = r.trace.records[i];
        if (rec.feasible && std::fabs(rec.raw_cost - optimum.at(rec.instance)) < 1e-9) ++hits;
    }
    const std::string detail = std::to_string(hits) + "/50 at the exhaustive optimum";
    return hits * 100 >= 95 * 50 ? ok(detail) : bad(detail);
}

Verdict replay_determinism() {
    testing::TempDir dir("acceptance-replay");
    const auto cfg = RunConfig::from_json(fixture_doc("pdptw_replay"), testing::data_path("fixtures/pdptw_replay"));
    const std::string a = dir / "a", b = dir / "b";
    run(cfg, a);
    run(cfg, b);
    double previous = -1.0;
    for (int k = 0; k <= cfg.iterations; ++k) {
        const std::string rel = "/iter_" + std::to_string(k) + "/population.json";
        const auto text = slurp(a + rel);
        if (text.empty()) return bad(rel + " missing");
        if (text != slurp(b + rel)) return bad(rel + " differs between runs");
        const double best = population_from_json(json::parse(text)).population.best().mean();
        if (best < previous - 1e-12) return bad("best internal fitness fell at iteration " + std::to_string(k));
        previous = best;
    }
    for (const char* f : {"/convergence.csv", "/report.md"})
        if (slurp(a + f).empty() || slurp(a + f) != slurp(b + f)) return bad(std::string(f) + " differs between runs");
    return ok();
}

Member member(std::string id, std::vector<double> fv, int born) {
    Member m;
    m.individual.id = std::move(id);
    m.individual.iteration_born = born;
    m.fitness = FitnessVector(std::move(fv));
    return m;
}

Verdict survival() {
    // Identical vectors: the elite is fixed, the other slot uniform over three.
    const std::vector<Member> pop{member("d", {0.5, 0.5}, 1), member("b", {0.5, 0.5}, 0)};
    const std::vector<Member> cands{member("a", {0.5, 0.5}, 1), member("c", {0.5, 0.5}, 0)};
    const SurvivalConfig cfg{2, 1, 5.0, 1e-6};
    std::map<std::string, int> counts{{"a", 0}, {"c", 0}, {"d", 0}};
    Rng rng(13);
    for (int t = 0; t < 10000; ++t) {
        const auto out = survive(pop, cands, cfg, rng, 1);
        const auto it = counts.find(out.population.members.at(1).individual.id);
        if (it == counts.end()) return bad("unexpected survivor " + out.population.members.at(1).individual.id);
        ++it->second;
    }
    double x = 0.0;
    for (const auto& [id, c] : counts) x += (c - 10000.0 / 3) * (c - 10000.0 / 3) / (10000.0 / 3);
    const double p = std::exp(-x / 2.0);  // chi-square survival function, 2 degrees of freedom
    if (!(p > 0.01)) return bad("chi-square p = " + std::to_string(p));

    std::vector<Member> weak;
    for (int i = 0; i < 6; ++i) weak.push_back(member("p" + std::to_string(i), {0.2 + 0.05 * i, 0.3}, 0));
    const std::vector<Member> star{member("star", {0.99, 0.99}, 1), member("meh", {0.1, 0.1}, 1)};
    for (std::uint64_t s = 0; s < 1000; ++s) {
        Rng r(s);
        const auto out = survive(weak, star, SurvivalConfig{4, 1, 5.0, 1e-6}, r, 1);
        if (!out.population.find("star")) return bad("dominating candidate lost at seed " + std::to_string(s));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "p = %.3f", p);
    return ok(buf);
}

Verdict live_smoke() {
    if (!llm::LiveConfig::from_env()) return {Verdict::skip, "no LAGO_API_KEY or OPENAI_API_KEY"};
    auto doc = fixture_doc("pdptw_replay");
    doc["backend"] = "live";
    doc.erase("replay_log");
    doc["iterations"] = 2;
    doc["llm"].erase("model");
    if (const char* m = std::getenv("LAGO_MODEL")) doc["llm"]["model"] = m;
    testing::TempDir dir("acceptance-live");
    try {
        const auto rep = run(RunConfig::from_json(doc, testing::data_path("fixtures/pdptw_replay")), dir / "out");
        if (!rep.aborted.empty()) return bad("aborted: " + rep.aborted);
        if (rep.rows.size() != 2) return bad("completed " + std::to_string(rep.rows.size()) + " iterations");
        char buf[96];
        std::snprintf(buf, sizeof buf, "train QYI %.4f", rep.train ? rep.train->index() : 0.0);
        return ok(buf);
    } catch (const std::exception& e) {
        return bad(e.what());
    }
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Verdict()> check;
        double limit_s;  // 0: no runtime bound
    };
    const std::vector<Criterion> criteria{
        {"metric arithmetic", metrics, 1.0},
        {"pdptw oracle equivalence", pdptw_oracle, 60.0},
        {"tsp oracle", tsp_oracle, 120.0},
        {"end-to-end replay determinism", replay_determinism, 120.0},
        {"survival statistics", survival, 0.0},
        {"live smoke run", live_smoke, 0.0},
    };
    int failures = 0;
    for (const auto& [name, check, limit] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = bad(std::string("exception: ") + e.what());
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (v.kind == Verdict::pass && limit > 0.0 && s > limit) v = bad("over the " + std::to_string(limit) + " s limit");
        const char* tag = v.kind == Verdict::pass ? "PASS" : v.kind == Verdict::fail ? "FAIL" : "SKIP";
        std::printf("%s  %-32s %7.2fs  %s\n", tag, name, s, v.detail.c_str());
        std::fflush(stdout);
        failures += v.kind == Verdict::fail;
    }
    return failures ? 1 : 0;
}
