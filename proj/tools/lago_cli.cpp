#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "lago/environment.hpp"
#include "lago/error.hpp"
#include "lago/format.hpp"
#include "lago/lns.hpp"
#include "lago/metrics.hpp"
#include "lago/runner.hpp"
#include "lago/serialization.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> backend;
    std::optional<int> iterations;
};

lago::RunConfig load_config(const std::string& path, const Overrides& o) {
    auto cfg = lago::RunConfig::load(path);
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.iterations) cfg.iterations = *o.iterations;
    if (o.backend) {
        if (*o.backend == "live")
            cfg.backend = lago::llm::Backend::live;
        else if (*o.backend == "replay")
            cfg.backend = lago::llm::Backend::replay;
        else
            throw lago::ConfigError("--backend must be live or replay");
    }
    return cfg;
}

void print_rows(const lago::RunReport& rep) {
    std::cout << "iteration  best_fitness  mean_fitness  best_train_qyi\n";
    for (const auto& r : rep.rows) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%9d  %12.6f  %12.6f  %14.6f\n", r.iteration, r.best_internal_fitness,
                      r.mean_internal_fitness, r.best_train_qyi);
        std::cout << buf;
    }
    if (rep.best) std::cout << "best individual: " << rep.best->individual.id << "\n";
    if (rep.test) std::cout << "test QYI: " << lago::format_sig4(rep.test->index()) << "\n";
}

/// Best tour over all permutations fixing city 0 (small instances only).
double brute_force_tsp(const lago::tsp::Instance& inst) {
    std::vector<int> rest(inst.coords.size() - 1);
    std::iota(rest.begin(), rest.end(), 1);
    double best = -1.0;
    do {
        lago::tsp::Tour t;
        t.order.push_back(0);
        t.order.insert(t.order.end(), rest.begin(), rest.end());
        const double len = lago::tsp::tour_length(inst, t);
        if (best < 0 || len < best) best = len;
    } while (std::next_permutation(rest.begin(), rest.end()));
    return best;
}

std::optional<double> best_known_for(const lago::ProblemInstance& inst, int iterations, int restarts) {
    namespace lns = lago::lns;
    const double penalty = lago::pdptw::kDefaultPenalty;
    std::optional<double> best;
    if (inst.env() == lago::EnvKind::tsp && inst.as_tsp().coords.size() <= 9) return brute_force_tsp(inst.as_tsp());
    for (int r = 0; r < restarts; ++r) {
        lns::Budget b{iterations, 60.0, lago::derive_seed(17, "best-known", static_cast<std::uint64_t>(r))};
        if (inst.env() == lago::EnvKind::tsp) {
            const auto out = lns::ts::search(inst.as_tsp(), lns::ts::construct_nearest_neighbor,
                                             lns::ts::score_removal_gain, b, penalty);
            const auto rep = lago::tsp::validate_tour(inst.as_tsp(), out.best);
            if (rep.feasible && (!best || rep.distance < *best)) best = rep.distance;
        } else {
            const auto& pi = inst.as_pdptw();
            const auto out = lns::pd::search(
                pi, [&](const lago::pdptw::Instance& i) { return lns::pd::construct_cheapest_insertion(i, penalty); },
                [&](const lago::pdptw::Instance& i, const lago::pdptw::Solution& s) {
                    return lns::pd::score_removal_gain(i, s, penalty);
                },
                b, penalty);
            const auto rep = lago::pdptw::validate(pi, out.best);
            if (rep.feasible && (!best || rep.distance < *best)) best = rep.distance;
        }
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LaGO: language-model-guided heuristic evolution"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string run_dir;
    std::string code_path;
    std::string instances_dir;
    std::string env_name = "pdptw";
    std::string registry_out;
    double ratio = 0.5;
    std::uint64_t split_seed = 0;
    int bk_iterations = 2000;
    int bk_restarts = 4;
    Overrides ov;

    auto* run = app.add_subcommand("run", "Run the evolution loop (resumes a partial run directory)");
    run->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Run directory")->required();
    run->add_option("--seed", ov.seed, "Override master_seed");
    run->add_option("--backend", ov.backend, "Override backend: live or replay");
    run->add_option("--iterations", ov.iterations, "Override iterations");

    auto* rep = app.add_subcommand("report", "Recompute convergence.csv and report.md from a run directory");
    rep->add_option("run_dir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

    auto* split = app.add_subcommand("split", "Print the train/test split of an instance directory");
    split->add_option("--config", config_path, "Take directory, ratio and seed from a run configuration");
    split->add_option("--instances", instances_dir, "Instance directory");
    split->add_option("--env", env_name, "pdptw or tsp");
    split->add_option("--ratio", ratio, "Training fraction");
    split->add_option("--seed", split_seed, "Split seed");

    auto* eval = app.add_subcommand("evaluate", "Evaluate one heuristic module on a set of instances");
    eval->add_option("--config", config_path, "Run configuration")->required()->check(CLI::ExistingFile);
    eval->add_option("--code", code_path, "Python module defining _init_solution and heuristic")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--instances", instances_dir, "Instance directory (default: the config's)");

    auto* record = app.add_subcommand("record-fixtures", "Run live and keep the call log as a replay fixture");
    record->add_option("--config", config_path, "Run configuration")->required()->check(CLI::ExistingFile);
    record->add_option("--out", registry_out, "Where to write the llm_log.jsonl fixture")->required();
    record->add_option("--iterations", ov.iterations, "Override iterations");

    auto* bk = app.add_subcommand("best-known", "Compute a best-known registry with the native LNS");
    bk->add_option("--env", env_name, "pdptw or tsp")->required();
    bk->add_option("--instances", instances_dir, "Instance directory")->required()->check(CLI::ExistingDirectory);
    bk->add_option("--out", registry_out, "Registry file to write")->required();
    bk->add_option("--iterations", bk_iterations, "LNS iterations per restart");
    bk->add_option("--restarts", bk_restarts, "Independent restarts");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = load_config(config_path, ov);
            const auto result = lago::run(cfg, out_dir);
            print_rows(result);
            if (!result.aborted.empty()) {
                std::cerr << "aborted: " << result.aborted << " (partial report written)\n";
                return 3;
            }
        } else if (*rep) {
            print_rows(lago::report(run_dir));
        } else if (*split) {
            auto env = lago::env_from_string(env_name);
            if (!config_path.empty()) {
                const auto cfg = lago::RunConfig::load(config_path);
                env = cfg.env;
                if (instances_dir.empty()) instances_dir = cfg.instance_dir;
                if (split->count("--ratio") == 0) ratio = cfg.split_ratio;
                if (split->count("--seed") == 0) split_seed = cfg.split_seed;
            }
            if (instances_dir.empty()) throw lago::UsageError("split needs --instances or --config");
            std::vector<std::string> names;
            for (const auto& inst : lago::load_instance_dir(env, instances_dir)) names.push_back(inst.name());
            const auto s = lago::split_dataset(names, ratio, split_seed);
            for (const auto& n : s.train) std::cout << "train\t" << n << "\n";
            for (const auto& n : s.test) std::cout << "test\t" << n << "\n";
        } else if (*eval) {
            const auto cfg = lago::RunConfig::load(config_path);
            const auto instances =
                lago::load_instance_dir(cfg.env, instances_dir.empty() ? cfg.instance_dir : instances_dir);
            const auto registry = lago::BestKnownRegistry::load(cfg.registry_path);
            const auto result =
                lago::evaluate_module(cfg, lago::read_text_file(code_path), instances, registry);
            for (const auto& r : result.trace.records) {
                std::cout << r.instance << "\tfeasible=" << (r.feasible ? "yes" : "no")
                          << "\tcost=" << lago::format_shortest(r.raw_cost) << "\tviolations=" << r.violation_count
                          << "\tfitness=" << lago::format_sig4(r.internal_fitness);
                if (!r.error_text.empty()) std::cout << "\terror=" << r.error_text.substr(0, r.error_text.find('\n'));
                std::cout << "\n";
            }
            const auto qy = lago::quality_yield(result.trace.outcomes(), registry);
            std::cout << "quality=" << lago::format_sig4(qy.quality) << " yield=" << lago::format_sig4(qy.yield)
                      << " QYI=" << lago::format_sig4(qy.index()) << "\n";
        } else if (*record) {
            auto cfg = load_config(config_path, ov);
            cfg.backend = lago::llm::Backend::live;
            const fs::path tmp = fs::temp_directory_path() / ("lago-record-" + std::to_string(::getpid()));
            lago::run(cfg, tmp.string());
            fs::copy_file(tmp / "llm_log.jsonl", registry_out, fs::copy_options::overwrite_existing);
            fs::remove_all(tmp);
            std::cout << "wrote " << registry_out << "\n";
        } else if (*bk) {
            const auto env = lago::env_from_string(env_name);
            lago::BestKnownRegistry reg;
            for (const auto& inst : lago::load_instance_dir(env, instances_dir)) {
                const auto best = best_known_for(inst, bk_iterations, bk_restarts);
                if (!best) {
                    std::cerr << "warning: no feasible solution found for " << inst.name() << "\n";
                    continue;
                }
                reg.set(inst.name(), *best);
            }
            lago::write_text_file(registry_out, reg.serialize());
            std::cout << "wrote " << reg.entries().size() << " entries to " << registry_out << "\n";
        }
    } catch (const lago::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const lago::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const lago::GatewayError& e) {
        std::cerr << "LLM gateway error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
