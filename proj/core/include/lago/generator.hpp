#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lago/llm.hpp"
#include "lago/model.hpp"
#include "lago/rng.hpp"

namespace lago {

/// Candidates generated per iteration by each operator; i1 runs only at iteration 0.
struct OperatorSchedule {
    int init_count = 10;
    int e1 = 4;
    int e2 = 3;
    int m1 = 3;

    void check() const;
    int per_iteration() const noexcept { return e1 + e2 + m1; }
};

struct SurvivalConfig {
    int population_size = 10;
    int elite_count = 2;
    double beta = 5.0;     // fitness sharpness
    double epsilon = 1e-6;  // diversity floor

    void check() const;
};

/// An LLM response taken apart into the two mandated functions.
struct ExtractedCode {
    std::string description;
    bool description_missing = false;
    std::string code;       // the full extracted module
    std::string cons_code;  // shared imports/helpers + `_init_solution`
    std::string ref_code;   // shared imports/helpers + `heuristic`
};

/// Description: first brace block inside a triple-quoted string, else the first
/// brace block anywhere. Code: the fenced blocks concatenated, else the longest
/// contiguous code region holding both function definitions. Throws ParseError
/// when either `_init_solution` or `heuristic` is missing.
ExtractedCode extract_code(std::string_view response);

/// Splits one Python module into (cons_code, ref_code), duplicating the
/// top-level blocks that define neither function into both.
std::pair<std::string, std::string> split_code(std::string_view code);

/// Weighted parent selection. m1: one parent, weight exp(beta * mean fitness).
/// e1/e2: first parent as for m1; second from the rest with weight
/// exp(beta * mean) * (distance to the first + epsilon). The result is ordered
/// better-first. Throws UsageError if the population is too small.
std::vector<std::size_t> select_parents(const Population& pop, Operator op, const SurvivalConfig& cfg, Rng& rng);

struct SurvivalResult {
    Population population;
    int shortfall = 0;  // N - |union| when the union was too small
};

/// Elitist, diversity-weighted survival from pop ∪ candidates. The top E by mean
/// fitness survive; the other N-E slots are drawn sequentially without
/// replacement with weight exp(beta * mean) * (min distance to those already
/// selected + epsilon). Members come out in rank order.
SurvivalResult survive(const std::vector<Member>& pop, const std::vector<Member>& candidates,
                       const SurvivalConfig& cfg, Rng& rng, int iteration);

/// Renders a member for an operator prompt.
using MemberRenderer = std::function<std::string(const Member&)>;

/// The update step: prompts the LLM with the operator templates and parses
/// the responses into new individuals. Unparseable responses are retried, then
/// skipped; they never abort a run.
class Generator {
public:
    Generator(llm::Gateway& gateway, ProblemDescription desc, int max_retries = 2);

    std::vector<llm::Message> messages_for(Operator op, std::span<const Member* const> parents,
                                           const MemberRenderer& render) const;

    /// `count` independent i1 calls at iteration 0. Throws FatalStartupError
    /// when none of them parses.
    std::vector<HeuristicIndividual> init_population(int count, std::vector<std::string>* events = nullptr);

    /// Applies `op` to `parents` (better first). nullopt when every attempt was unparseable.
    std::optional<HeuristicIndividual> apply_operator(int iteration, Operator op, int ordinal,
                                                      std::span<const Member* const> parents,
                                                      const MemberRenderer& render,
                                                      std::vector<std::string>* events = nullptr);

    static std::string make_id(int iteration, Operator op, int ordinal);

private:
    std::optional<HeuristicIndividual> ask(int iteration, Operator op, int ordinal,
                                           const std::vector<llm::Message>& messages,
                                           std::vector<std::string>* events);

    llm::Gateway& gateway_;
    ProblemDescription desc_;
    int max_retries_;
};

}  // namespace lago
