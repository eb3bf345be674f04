#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "lago/analyst.hpp"
#include "lago/forward_eval.hpp"
#include "lago/model.hpp"

// JSON forms of the run-directory documents. Readers throw ParseError on
// documents with missing or mistyped fields.
namespace lago {

void to_json(nlohmann::json& j, const HeuristicIndividual& v);
void from_json(const nlohmann::json& j, HeuristicIndividual& v);
void to_json(nlohmann::json& j, const FitnessVector& v);
void from_json(const nlohmann::json& j, FitnessVector& v);
void to_json(nlohmann::json& j, const InstanceProfile& v);
void from_json(const nlohmann::json& j, InstanceProfile& v);
void to_json(nlohmann::json& j, const SemanticGradient& v);
void from_json(const nlohmann::json& j, SemanticGradient& v);
void to_json(nlohmann::json& j, const Member& v);
void from_json(const nlohmann::json& j, Member& v);
void to_json(nlohmann::json& j, const ViolationBreakdown& v);
void from_json(const nlohmann::json& j, ViolationBreakdown& v);
void to_json(nlohmann::json& j, const TraceRecord& v);
void from_json(const nlohmann::json& j, TraceRecord& v);
void to_json(nlohmann::json& j, const ExecutionTrace& v);
void from_json(const nlohmann::json& j, ExecutionTrace& v);
void to_json(nlohmann::json& j, const FeatureSet& v);
void from_json(const nlohmann::json& j, FeatureSet& v);

/// Population document of one iteration, with the feature set in force.
struct PopulationDoc {
    Population population;
    std::optional<FeatureSet> features;
    std::vector<std::string> events;
};

nlohmann::json population_to_json(const PopulationDoc& doc);
PopulationDoc population_from_json(const nlohmann::json& j);

/// Stable text form: two-space indent, sorted keys, trailing newline.
std::string dump_document(const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);
/// Writes through a temporary file and renames, so readers never see partial files.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace lago
