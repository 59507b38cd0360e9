#include "sclm/prompts.hpp"

#include <algorithm>
#include <stdexcept>

namespace sclm {

std::string PreferenceClause::render() const {
    switch (kind) {
        case ClauseKind::Prioritize:
            return "Prioritize agents with " +
                   std::string(direction == Direction::Low ? "low" : "high") + " value of " +
                   category + ".";
        case ClauseKind::NoShift:
            return "Do not change the utility distribution for " + category + ".";
        case ClauseKind::MaximizeUtility:
            return "Maximize the total generated utility.";
    }
    return {};
}

std::string PreferenceClause::key() const {
    switch (kind) {
        case ClauseKind::Prioritize:
            return std::string("prioritize:") + (direction == Direction::Low ? "low:" : "high:") +
                   category;
        case ClauseKind::NoShift: return "noshift:" + category;
        case ClauseKind::MaximizeUtility: return "maxutil";
    }
    return {};
}

std::string PreferencePrompt::render() const {
    std::string out;
    for (const auto& c : clauses) {
        if (!out.empty()) out += ' ';
        out += c.render();
    }
    return out;
}

std::string PreferencePrompt::key() const {
    std::string out;
    for (const auto& c : clauses) {
        if (!out.empty()) out += ',';
        out += c.key();
    }
    return out;
}

void PreferencePrompt::validate(const FeatureSchema& schema) const {
    if (clauses.empty()) throw std::invalid_argument("prompt must contain at least one clause");
    int maxutil = 0;
    for (const auto& c : clauses) {
        if (c.kind == ClauseKind::MaximizeUtility)
            ++maxutil;
        else
            schema.category_index(c.category);  // throws on unknown category
        if (c.weight < 0) throw std::invalid_argument("clause weight must be >= 0");
    }
    if (maxutil > 1) throw std::invalid_argument("at most one MaximizeUtility clause");
}

std::vector<std::string> PreferencePrompt::prioritized_categories() const {
    std::vector<std::string> out;
    for (const auto& c : clauses)
        if (c.kind == ClauseKind::Prioritize) out.push_back(c.category);
    return out;
}

PreferencePrompt parse_prompt_spec(const std::string& spec, const FeatureSchema& schema) {
    PreferencePrompt prompt;
    size_t start = 0;
    while (start <= spec.size()) {
        size_t end = spec.find(',', start);
        std::string item = spec.substr(start, end == std::string::npos ? end : end - start);
        if (!item.empty()) {
            PreferenceClause clause;
            if (item == "maxutil") {
                clause.kind = ClauseKind::MaximizeUtility;
            } else if (item.rfind("noshift:", 0) == 0) {
                clause.kind = ClauseKind::NoShift;
                clause.category = item.substr(8);
            } else if (item.rfind("prioritize:low:", 0) == 0) {
                clause.category = item.substr(15);
            } else if (item.rfind("prioritize:high:", 0) == 0) {
                clause.direction = Direction::High;
                clause.category = item.substr(16);
            } else {
                throw std::invalid_argument("unrecognized clause spec: " + item);
            }
            prompt.clauses.push_back(std::move(clause));
        }
        if (end == std::string::npos) break;
        start = end + 1;
    }
    prompt.validate(schema);
    return prompt;
}

std::vector<PreferencePrompt> singular_prompts(const FeatureSchema& schema) {
    std::vector<PreferencePrompt> prompts;
    for (const auto& cat : schema.categories)
        for (Direction dir : {Direction::Low, Direction::High}) {
            PreferencePrompt p;
            p.clauses.push_back({ClauseKind::Prioritize, cat.name, dir});
            prompts.push_back(std::move(p));
        }
    return prompts;
}

std::vector<PreferencePrompt> composite_prompts(const FeatureSchema& schema) {
    std::vector<PreferencePrompt> prompts;
    for (size_t i = 0; i < schema.categories.size(); ++i)
        for (size_t j = i + 1; j < schema.categories.size(); ++j)
            for (Direction di : {Direction::Low, Direction::High})
                for (Direction dj : {Direction::Low, Direction::High}) {
                    PreferencePrompt p;
                    p.clauses.push_back({ClauseKind::Prioritize, schema.categories[i].name, di});
                    p.clauses.push_back({ClauseKind::Prioritize, schema.categories[j].name, dj});
                    prompts.push_back(std::move(p));
                }
    return prompts;
}

PreferencePrompt extend_fair(const PreferencePrompt& prompt, const FeatureSchema& schema) {
    PreferencePrompt out = prompt;
    auto referenced = [&](const std::string& cat) {
        return std::any_of(prompt.clauses.begin(), prompt.clauses.end(),
                           [&](const PreferenceClause& c) {
                               return c.kind != ClauseKind::MaximizeUtility && c.category == cat;
                           });
    };
    for (const auto& cat : schema.categories)
        if (!referenced(cat.name))
            out.clauses.push_back({ClauseKind::NoShift, cat.name, Direction::Low});
    return out;
}

PreferencePrompt extend_util(const PreferencePrompt& prompt) {
    PreferencePrompt out = prompt;
    for (const auto& c : out.clauses)
        if (c.kind == ClauseKind::MaximizeUtility) return out;
    out.clauses.push_back({ClauseKind::MaximizeUtility, "", Direction::Low});
    return out;
}

}  // namespace sclm
