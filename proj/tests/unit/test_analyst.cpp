#include <gtest/gtest.h>

#include <cmath>

#include "lago/analyst.hpp"
#include "lago/error.hpp"
#include "lago/prompts.hpp"
#include "scripted_backend.hpp"
#include "support.hpp"

using namespace lago;
using lago::testing::data_path;
using lago::testing::ScriptedGateway;
using nlohmann::json;

namespace {

std::string feature_response(const std::vector<std::string>& names, const std::string& extra = "") {
    std::string code = "```python\nimport math\n" + extra + "\n";
    for (const auto& n : names) code += "\ndef " + n + "(instance, solution):\n    return 1.0\n";
    code += "\nfeature_func_list = [";
    for (std::size_t i = 0; i < names.size(); ++i) code += (i ? ", " : "") + names[i];
    return "Features below.\n" + code + "]\n```\n";
}

ExecutionTrace trace_of(std::vector<std::string> names, std::string error = "") {
    ExecutionTrace t;
    t.individual_id = "x";
    for (auto& n : names) {
        TraceRecord r;
        r.instance = n;
        t.records.push_back(r);
    }
    if (!t.records.empty()) t.records.back().error_text = std::move(error);
    return t;
}

FeatureMatrix matrix(std::vector<std::string> names, std::vector<std::vector<std::optional<double>>> rows) {
    FeatureMatrix fm;
    fm.names = std::move(names);
    for (auto& r : rows) {
        std::vector<FeatureCell> cells;
        for (auto& v : r) cells.push_back({v, v ? "" : "error"});
        fm.rows.push_back(std::move(cells));
    }
    return fm;
}

AnalystSettings settings(int max_repairs = 2) {
    AnalystSettings s;
    s.max_features = 4;
    s.feature_timeout_s = 2.0;
    s.max_repairs = max_repairs;
    s.workers = 2;
    s.harness_command = lago::testing::harness_command();
    return s;
}

struct Pairs {
    std::vector<ProblemInstance> instances = load_instance_dir(EnvKind::pdptw, data_path("pdptw_tiny"));
    ProblemInstance tiny1 = load_problem(EnvKind::pdptw, data_path("pdptw_tiny/tiny1.pdptw"));

    std::vector<FeaturePair> tiny1_pairs() const {
        return {{&tiny1, json{{"routes", {{1, 2}}}}},
                {&tiny1, json{{"routes", {{2, 1}}}}},
                {&tiny1, json{{"routes", {{1}, {2}}}}}};
    }
};

}  // namespace

// --------------------------------------------------------------- parsing

TEST(ParseFeatureCode, Valid) {
    const auto fs = parse_feature_code(feature_response({"a", "b", "c", "d"}), 8);
    ASSERT_TRUE(fs.has_value());
    EXPECT_EQ(fs->names, (std::vector<std::string>{"a", "b", "c", "d"}));
    EXPECT_NE(fs->source.find("def a("), std::string::npos);
    EXPECT_EQ(fs->source.find("```"), std::string::npos);
}

TEST(ParseFeatureCode, Failures) {
    std::string why;
    EXPECT_FALSE(parse_feature_code("def f(i, s):\n    return 1.0\n", 8, &why));
    EXPECT_NE(why.find("feature_func_list"), std::string::npos);
    EXPECT_FALSE(parse_feature_code("feature_func_list = []\n", 8));
    EXPECT_FALSE(parse_feature_code("feature_func_list = make()\n", 8));
    EXPECT_FALSE(parse_feature_code(feature_response({"a", "b", "c"}), 2));
    EXPECT_FALSE(parse_feature_code("if feature_func_list == [a]:\n    pass\n", 8));
}

TEST(ParseFeatureCode, MultilineListWithComments) {
    const auto fs = parse_feature_code(
        "def a(i, s):\n    return 1.0\n\nfeature_func_list: list = [\n    a,  # first\n    b,\n]\n", 8);
    ASSERT_TRUE(fs.has_value());
    EXPECT_EQ(fs->names, (std::vector<std::string>{"a", "b"}));
}

TEST(FeatureStatus, RoundTrip) {
    for (auto s : {FeatureStatus::active, FeatureStatus::failed, FeatureStatus::repaired})
        EXPECT_EQ(feature_status_from_string(to_string(s)), s);
}

// -------------------------------------------------------------- gradient

TEST(AssembleGradient, Example) {
    const auto fm = matrix({"psi"}, {{2.0}, {4.0}});
    const auto g = assemble_gradient(FitnessVector({1, 0}), &fm, trace_of({"i0", "i1"}));
    EXPECT_DOUBLE_EQ(g.mean_fitness, 0.5);
    ASSERT_EQ(g.stats.size(), 1u);
    ASSERT_TRUE(g.stats[0].has_value());
    EXPECT_DOUBLE_EQ(g.stats[0]->min, 2.0);
    EXPECT_DOUBLE_EQ(g.stats[0]->max, 4.0);
    EXPECT_DOUBLE_EQ(g.stats[0]->mean, 3.0);
    ASSERT_TRUE(g.best_instance && g.worst_instance);
    EXPECT_EQ(g.best_instance->features, (std::vector<std::optional<double>>{2.0}));
    EXPECT_EQ(g.worst_instance->features, (std::vector<std::optional<double>>{4.0}));
    EXPECT_EQ(g.best_instance->instance_id, "i0");
    EXPECT_TRUE(g.error_msg.empty());
    const auto text = render_performance_summary(g);
    EXPECT_NE(text.find("Range=[2, 4]"), std::string::npos);
    EXPECT_NE(text.find("Avg=3"), std::string::npos);
}

TEST(AssembleGradient, SingleInstanceBestIsWorst) {
    const auto fm = matrix({"a", "b"}, {{1.5, std::nullopt}});
    const auto g = assemble_gradient(FitnessVector({0.7}), &fm, trace_of({"only"}, "boom"));
    EXPECT_EQ(g.best_instance, g.worst_instance);
    EXPECT_FALSE(g.stats[1].has_value());
    EXPECT_EQ(g.error_msg, "boom");
    EXPECT_NE(render_performance_summary(g).find("Avg=n/a, Range=[n/a, n/a]"), std::string::npos);
}

TEST(AssembleGradient, FitnessOnlyAndTies) {
    const auto g = assemble_gradient(FitnessVector({0.5, 0.5, 0.5}), nullptr, trace_of({"a", "b", "c"}));
    EXPECT_FALSE(g.has_features());
    EXPECT_TRUE(g.stats.empty());
    EXPECT_EQ(g.best_instance->instance_id, "a");
    EXPECT_EQ(g.worst_instance->instance_id, "a");
    const auto fm = matrix({"a"}, {{1.0}});
    EXPECT_THROW(assemble_gradient(FitnessVector({0.5, 0.5}), &fm, trace_of({"a", "b"})), UsageError);
}

TEST(AssembleGradient, RangeBracketsMeanProperty) {
    Rng rng(12);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t rows = 1 + rng.below(6), cols = 1 + rng.below(4);
        std::vector<double> fv;
        std::vector<std::vector<std::optional<double>>> cells(rows);
        std::vector<std::string> names, insts;
        for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
        for (std::size_t r = 0; r < rows; ++r) {
            fv.push_back(rng.uniform());
            insts.push_back("i" + std::to_string(r));
            for (std::size_t c = 0; c < cols; ++c) {
                const auto roll = rng.below(5);
                cells[r].push_back(roll == 0 ? std::nullopt : std::optional<double>((rng.uniform() - 0.5) * 1e3));
            }
        }
        const auto fm = matrix(names, cells);
        const auto g = assemble_gradient(FitnessVector(fv), &fm, trace_of(insts));
        EXPECT_EQ(g, assemble_gradient(FitnessVector(fv), &fm, trace_of(insts)));
        for (const auto& s : g.stats)
            if (s) {
                EXPECT_LE(s->min, s->mean);
                EXPECT_LE(s->mean, s->max);
            }
    }
}

TEST(RenderIndividual, Template) {
    HeuristicIndividual ind;
    ind.iteration_born = 3;
    ind.source = "def _init_solution(i): ...\ndef heuristic(i, s): ...";
    ind.description = "Short.";
    const auto fm = matrix({"psi"}, {{2.0}, {4.0}});
    const auto g = assemble_gradient(FitnessVector({1, 0}), &fm, trace_of({"i0", "i1"}));
    const auto text = render_individual(ind, g, 0.123456);
    EXPECT_EQ(text,
              "Response at iteration 3\n\ncode=def _init_solution(i): ...\ndef heuristic(i, s): ...\n\n"
              "text_description=\"\"\"Short.\"\"\"\n\navg_objective 0.1235\n\nerror_msg=''\n\n"
              "Performance Summary:\n\n- psi: Avg=3, Range=[2, 4]\n\n"
              "- Worst Instance (i1): Fitness=0, Features=[4]\n\n- Best Instance (i0): Fitness=1, Features=[2]\n");
}

// ---------------------------------------------------------------- prompts

TEST(AnalystPrompts, ImprovementBranches) {
    ScriptedGateway sg({});
    Analyst a(sg.gateway, prompts::problem_description(EnvKind::pdptw),
              std::string(prompts::template_analyst_code(EnvKind::pdptw)), settings());
    SemanticGradient g;
    g.mean_fitness = 0.5;
    const std::vector<double> costs{4.0, std::nan("")};
    const auto down = a.propose_messages(nullptr, g, costs, false);
    const auto up = a.propose_messages(nullptr, g, costs, true);
    const std::string no_improve(prompts::raw("analyst_not_improved.txt"));
    EXPECT_NE(down[1].content.find(no_improve), std::string::npos);
    EXPECT_EQ(up[1].content.find(no_improve), std::string::npos);
    EXPECT_NE(up[1].content.find(std::string(prompts::raw("analyst_improved.txt"))), std::string::npos);
    EXPECT_NE(down[1].content.find("[4, n/a]"), std::string::npos);
    EXPECT_NE(down[0].content.find(std::string(prompts::template_analyst_code(EnvKind::pdptw))), std::string::npos);

    FeatureSet prev{"feature_func_list = [old_one]\n", {"old_one"}, 1, FeatureStatus::active};
    EXPECT_NE(a.propose_messages(&prev, g, costs, true)[1].content.find("old_one"), std::string::npos);
    const auto fix = a.repair_messages(prev, "Traceback: boom");
    EXPECT_NE(fix[1].content.find("Traceback: boom"), std::string::npos);
    EXPECT_NE(fix[1].content.find("old_one"), std::string::npos);
}

TEST(AnalystPropose, RetriesThenUnavailable) {
    ScriptedGateway sg({{"1/analyst/propose/0", "nothing"},
                        {"1/analyst/propose/0r1", feature_response({"a", "b", "c", "d"})},
                        {"2/analyst/propose/0", "x"},
                        {"2/analyst/propose/0r1", "y"},
                        {"2/analyst/propose/0r2", "z"}});
    Analyst a(sg.gateway, prompts::problem_description(EnvKind::pdptw), "tmpl", settings());
    std::vector<std::string> events;
    const auto fs = a.propose_features(1, nullptr, SemanticGradient{}, {}, true, &events);
    ASSERT_TRUE(fs.has_value());
    EXPECT_EQ(fs->names.size(), 4u);
    EXPECT_EQ(fs->iteration, 1);
    EXPECT_EQ(fs->status, FeatureStatus::active);
    EXPECT_FALSE(a.propose_features(2, nullptr, SemanticGradient{}, {}, true, &events).has_value());
    EXPECT_NE(events.back().find("unavailable"), std::string::npos);
}

TEST(AnalystRepair, Preconditions) {
    ScriptedGateway sg({{"1/analyst/repair/0", feature_response({"route_count"})}});
    Analyst a(sg.gateway, prompts::problem_description(EnvKind::pdptw), "tmpl", settings());
    FeatureSet failed{"feature_func_list = [x]\n", {"x"}, 1, FeatureStatus::failed};
    EXPECT_THROW(a.repair_features(1, 0, failed, ""), UsageError);
    FeatureSet active = failed;
    active.status = FeatureStatus::active;
    EXPECT_THROW(a.repair_features(1, 0, active, "tb"), UsageError);
    const auto fixed = a.repair_features(1, 0, failed, "tb");
    ASSERT_TRUE(fixed.has_value());
    EXPECT_EQ(fixed->status, FeatureStatus::repaired);
}

// ------------------------------------------------------------- execution

TEST(RunFeatures, ConstantColumnAndPartialFailure) {
    Pairs p;
    ScriptedGateway sg({});
    Analyst a(sg.gateway, prompts::problem_description(EnvKind::pdptw), "tmpl", settings());
    const FeatureSet fs{"feature_func_list = [constant_one, inverse_violation_count, route_count, nan_value]\n",
                        {"constant_one", "inverse_violation_count", "route_count", "nan_value"},
                        1,
                        FeatureStatus::active};
    const auto pairs = p.tiny1_pairs();
    const auto fm = a.run_features(fs, pairs);
    ASSERT_EQ(fm.rows.size(), 3u);
    EXPECT_FALSE(fm.whole_set_failed);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(fm.rows[i][0].value, 1.0);
        EXPECT_FALSE(fm.rows[i][3].value.has_value());
        EXPECT_EQ(fm.rows[i][3].absent_reason, "non_finite");
        // Route counts cross-checked against the solutions themselves.
        const auto routes = pairs[i].solution->at("routes").size();
        EXPECT_EQ(fm.rows[i][2].value, static_cast<double>(routes));
    }
    // Dividing by zero violations fails only on the feasible pair.
    EXPECT_FALSE(fm.rows[0][1].value.has_value());
    EXPECT_EQ(fm.rows[0][1].absent_reason, "error");
    EXPECT_TRUE(fm.rows[1][1].value.has_value());
    EXPECT_TRUE(fm.rows[2][1].value.has_value());
    EXPECT_FALSE(fm.needs_repair());
}

TEST(RunFeatures, NoSolutionAndAlwaysFailing) {
    Pairs p;
    ScriptedGateway sg({});
    Analyst a(sg.gateway, prompts::problem_description(EnvKind::pdptw), "tmpl", settings());
    const FeatureSet fs{"feature_func_list = [constant_one, text_label]\n", {"constant_one", "text_label"}, 1,
                        FeatureStatus::active};
    const std::vector<FeaturePair> pairs{{&p.tiny1, std::nullopt}, {&p.tiny1, json{{"routes", {{1, 2}}}}}};
    const auto fm = a.run_features(fs, pairs);
    EXPECT_EQ(fm.rows[0][0].absent_reason, "no_solution");
    EXPECT_EQ(fm.rows[1][0].value, 1.0);
    EXPECT_EQ(fm.rows[1][1].absent_reason, "error");
    EXPECT_TRUE(fm.needs_repair());
    EXPECT_FALSE(fm.first_traceback.empty());
}

TEST(RunFeatures, WholeSetFailure) {
    Pairs p;
    ScriptedGateway sg({});
    Analyst a(sg.gateway, prompts::problem_description(EnvKind::pdptw), "tmpl", settings());
    const FeatureSet fs{"# native: fault=raise\nfeature_func_list = [constant_one]\n", {"constant_one"}, 1,
                        FeatureStatus::active};
    const auto fm = a.run_features(fs, p.tiny1_pairs());
    EXPECT_TRUE(fm.whole_set_failed);
    EXPECT_TRUE(fm.needs_repair());
    EXPECT_NE(fm.first_traceback.find("RuntimeError"), std::string::npos);
}

// -------------------------------------------------------------- lifecycle

namespace {

std::vector<std::vector<FeaturePair>> groups(const Pairs& p) {
    return {p.tiny1_pairs(), {{&p.tiny1, json{{"routes", {{1, 2}}}}}}};
}

}  // namespace

TEST(Analyze, ProposeRunAssemble) {
    Pairs p;
    ScriptedGateway sg({{"1/analyst/propose/0", feature_response({"constant_one", "route_count"})}});
    Analyst a(sg.gateway, prompts::problem_description(EnvKind::pdptw), "tmpl", settings());
    const auto g = groups(p);
    const auto res = a.analyze(1, nullptr, SemanticGradient{}, {}, true, g);
    ASSERT_TRUE(res.features.has_value());
    EXPECT_EQ(res.features->status, FeatureStatus::active);
    ASSERT_EQ(res.matrices.size(), 2u);
    EXPECT_EQ(res.matrices[0].rows.size(), 3u);
    EXPECT_EQ(res.matrices[1].rows.size(), 1u);
}

TEST(Analyze, FailingSetRepaired) {
    Pairs p;
    ScriptedGateway sg({{"1/analyst/propose/0", feature_response({"constant_one"}, "# native: fault=raise")},
                        {"1/analyst/repair/0", feature_response({"constant_one", "route_count"})}});
    Analyst a(sg.gateway, prompts::problem_description(EnvKind::pdptw), "tmpl", settings());
    std::vector<std::string> events;
    const auto res = a.analyze(1, nullptr, SemanticGradient{}, {}, true, groups(p), &events);
    ASSERT_TRUE(res.features.has_value());
    EXPECT_EQ(res.features->status, FeatureStatus::repaired);
    EXPECT_EQ(res.features->names.size(), 2u);
    EXPECT_EQ(res.matrices.size(), 2u);
}

TEST(Analyze, RepairsExhaustedRevertToPrevious) {
    Pairs p;
    const std::string broken = feature_response({"constant_one"}, "# native: fault=raise");
    ScriptedGateway sg({{"2/analyst/propose/0", broken}, {"2/analyst/repair/0", broken}, {"2/analyst/repair/1", broken}});
    Analyst a(sg.gateway, prompts::problem_description(EnvKind::pdptw), "tmpl", settings());
    const FeatureSet prev{"feature_func_list = [route_count]\n", {"route_count"}, 1, FeatureStatus::active};
    std::vector<std::string> events;
    const auto res = a.analyze(2, &prev, SemanticGradient{}, {}, false, groups(p), &events);
    ASSERT_TRUE(res.features.has_value());
    EXPECT_EQ(res.features->names, prev.names);
    EXPECT_EQ(res.matrices.size(), 2u);
    bool reverted = false;
    for (const auto& e : events) reverted |= e.find("reverting") != std::string::npos;
    EXPECT_TRUE(reverted);
}

TEST(Analyze, NothingWorksGivesFitnessOnly) {
    Pairs p;
    const std::string broken = feature_response({"constant_one"}, "# native: fault=raise");
    ScriptedGateway sg({{"2/analyst/propose/0", broken}, {"2/analyst/repair/0", broken}, {"2/analyst/repair/1", broken}});
    Analyst a(sg.gateway, prompts::problem_description(EnvKind::pdptw), "tmpl", settings());
    const auto res = a.analyze(2, nullptr, SemanticGradient{}, {}, false, groups(p));
    EXPECT_FALSE(res.features.has_value());
    EXPECT_TRUE(res.matrices.empty());
}
