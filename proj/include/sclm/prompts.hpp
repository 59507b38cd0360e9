#pragma once

#include <string>
#include <vector>

#include "sclm/types.hpp"

namespace sclm {

enum class ClauseKind { Prioritize, NoShift, MaximizeUtility };
enum class Direction { Low, High };

struct PreferenceClause {
    ClauseKind kind = ClauseKind::Prioritize;
    std::string category;  // empty for MaximizeUtility
    Direction direction = Direction::Low;
    double weight = 1.0;

    std::string render() const;
    std::string key() const;  // stable identifier, e.g. "prioritize:low:Feature A"
};

struct PreferencePrompt {
    std::vector<PreferenceClause> clauses;

    std::string render() const;  // clauses joined into one instruction text
    std::string key() const;
    void validate(const FeatureSchema& schema) const;
    std::vector<std::string> prioritized_categories() const;
};

// Parses a compact clause list, e.g.
// "prioritize:low:Feature A,noshift:Feature B,maxutil".
PreferencePrompt parse_prompt_spec(const std::string& spec, const FeatureSchema& schema);

// 2 directions x |categories| singular prioritization prompts.
std::vector<PreferencePrompt> singular_prompts(const FeatureSchema& schema);
// All category pairs x direction pairs (12 for three categories).
std::vector<PreferencePrompt> composite_prompts(const FeatureSchema& schema);

// Appends NoShift clauses for every category not referenced by the prompt.
PreferencePrompt extend_fair(const PreferencePrompt& prompt, const FeatureSchema& schema);
// Appends a MaximizeUtility clause.
PreferencePrompt extend_util(const PreferencePrompt& prompt);

}  // namespace sclm
