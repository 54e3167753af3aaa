#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "civitas/rules.hpp"

namespace civitas {

struct RuleSet {
    std::string name;
    std::vector<RuleDef> rules;

    const RuleDef* find(std::string_view id) const;
};

class UnknownRuleError : public std::runtime_error {
public:
    explicit UnknownRuleError(std::string_view id)
        : std::runtime_error("unknown rule id '" + std::string(id) + "'") {}
};

/// The thirteen built-in principles P1..P13, in order, with their right and
/// perspective metadata and natural-language statements. Immutable shared data.
const RuleSet& builtin_ruleset();

/// Rule-language source for a built-in rule (P1..P13 or SafetyPrinciple);
/// re-parses to the identical RuleDef. Throws UnknownRuleError.
std::string rule_source(std::string_view id);

/// The stand-alone safety assertion: a device that is not hazardous must not
/// interact physically.
const RuleDef& safety_assertion();

/// Resolves a built-in id, including SafetyPrinciple. Throws UnknownRuleError.
const RuleDef& builtin_rule(std::string_view id);

}  // namespace civitas
