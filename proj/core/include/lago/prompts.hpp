#pragma once

#include <map>
#include <string>
#include <string_view>

#include "lago/environment.hpp"
#include "lago/model.hpp"

// Prompt templates and per-environment skeleton texts. The files live under
// core/prompts/ and are compiled into the library verbatim.
namespace lago::prompts {

/// Contents of an embedded file, e.g. raw("op_e1.txt"). Throws ConfigError if absent.
std::string_view raw(std::string_view name);

/// Replaces each `{key}` for the keys in `values`, in one left-to-right pass.
/// Other braces (code, "{}" in instructions) are left untouched, and
/// substituted text is never rescanned.
std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& values);

ProblemDescription problem_description(EnvKind env);
std::string_view template_heuristic(EnvKind env);
std::string_view template_analyst_code(EnvKind env);
/// Hand-written baseline heuristic pair (one module defining both functions).
std::string_view baseline_code(EnvKind env);

}  // namespace lago::prompts
