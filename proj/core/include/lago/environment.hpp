#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lago/pdptw.hpp"
#include "lago/tsp.hpp"
#include "lago/validation.hpp"

namespace lago {

enum class EnvKind { pdptw, tsp };

std::string_view to_string(EnvKind env) noexcept;
EnvKind env_from_string(std::string_view s);

/// A problem instance of either supported environment, behind one interface.
class ProblemInstance {
public:
    ProblemInstance(pdptw::Instance inst) : inst_(std::move(inst)) {}  // NOLINT
    ProblemInstance(tsp::Instance inst) : inst_(std::move(inst)) {}    // NOLINT

    EnvKind env() const noexcept {
        return std::holds_alternative<pdptw::Instance>(inst_) ? EnvKind::pdptw : EnvKind::tsp;
    }
    const std::string& name() const;
    /// Number of LNS decision variables (requests for PDPTW, cities for TSP).
    std::size_t variable_count() const;

    const pdptw::Instance& as_pdptw() const { return std::get<pdptw::Instance>(inst_); }
    const tsp::Instance& as_tsp() const { return std::get<tsp::Instance>(inst_); }

    nlohmann::json to_wire() const;
    /// Validates a wire-format solution document. Throws UsageError/ParseError
    /// when the document is malformed or names unknown nodes.
    ValidationReport validate(const nlohmann::json& solution) const;
    /// Cost with violations priced at `penalty` each (TSP validity is a hard
    /// permutation check, priced the same way).
    double penalized(const ValidationReport& r, double penalty) const {
        return r.distance + penalty * r.violation_count;
    }

private:
    std::variant<pdptw::Instance, tsp::Instance> inst_;
};

ProblemInstance load_problem(EnvKind env, const std::string& path);

/// Loads every instance file of `env` in `dir` (".pdptw"/".txt" or ".tsp"),
/// ordered lexicographically by file name. This order is the canonical
/// fitness-vector alignment of a run.
std::vector<ProblemInstance> load_instance_dir(EnvKind env, const std::string& dir);

}  // namespace lago
