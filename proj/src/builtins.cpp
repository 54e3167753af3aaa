#include "civitas/builtins.hpp"

#include <array>
#include <utility>

namespace civitas {

namespace {

struct BuiltinSource {
    std::string_view id;
    std::string_view source;
};

// Each entry is complete rule-language source; the ruleset is built by
// parsing these, so rule_source(id) re-parses to the identical RuleDef by
// construction.
constexpr BuiltinSource kBuiltinSources[] = {
    {"P1",
     R"(rule P1 right=safety perspective=residents-iot_service
  statement="The service should not be based on a device that involves high-risk physical movement, change, or transmission of harmful substances or information."
  : forall d in devices:
      not (d.movement_type in {mobile, hazardous} or d.risk_type = high or d.transmits_harmful = true)
)"},
    {"P2",
     R"(rule P2 right=safety perspective=residents-government
  statement="Government should not intend to apply an IoT device to transform the physical living environment of residents while residents may interact directly with the device under safety threats."
  : forall g in governments, d in devices:
      not (transform_physical_living_environment in g.project_goals)
      or d.interaction_type = non_physical
)"},
    {"P3",
     R"(rule P3 right=safety perspective=residents-residents
  statement="Residents should not get information about the physical locations of other residents or have increased opportunity of physical interactions with other residents by using the IoT device."
  : not exists r in resident_groups: flow(* -> residents : resident_location)
)"},
    {"P4",
     R"(rule P4 right=privacy perspective=residents-government
  statement="The IoT device should not collect and/or analyze user data and make that information available to government agencies without consent."
  : forall d in devices:
      not d.collects_resident_data
      or not flow(device -> government : resident_personal_data, consent=denied)
)"},
    {"P5",
     R"(rule P5 right=privacy perspective=residents-residents
  statement="The IoT device should not collect and/or analyze user data and make that information public or available to other residents without consent."
  : forall d in devices:
      not d.collects_resident_data
      or not flow(device -> residents : resident_personal_data, consent=denied)
)"},
    {"P6",
     R"(rule P6 right=privacy perspective=residents-business
  statement="The IoT device should not collect and/or analyze user data and make that information used by businesses or obtained by hackers without consent."
  : forall d in devices:
      not d.collects_resident_data
      or not (flow(device -> business : resident_personal_data, consent=denied)
              or flow(device -> external : resident_personal_data, consent=denied))
)"},
    {"P7",
     R"(rule P7 right=fairness perspective=residents-business
  statement="Business such as restaurants should not obtain information such as the arrival time and possible class of customers via the smart city technology."
  : forall b in businesses:
      not flow(* -> business : arrival_time) and not flow(* -> business : economic_status)
)"},
    {"P8",
     R"(rule P8 right=fairness perspective=residents-residents
  statement="The IoT device should not bring up competing preferences towards its usage among residents, so that the device will not be beneficial to certain residents while causing disadvantages to others."
  : forall r in resident_groups: card(r.iot_usage_preferences) = 1
)"},
    {"P9",
     R"(rule P9 right=fairness perspective=business-business
  statement="The smart city technology should not only be deployed in a small subset of neighborhoods or privileged neighborhoods to facilitate nearby businesses."
  : forall d in devices: 5 * card(d.deploy_neighborhoods) >= 2 * card(universe)
)"},
    {"P10",
     R"(rule P10 right=truth perspective=residents-government
  statement="Residents should be informed about the goals and purposes of the smart city project as well as matters that may affect their rights."
  : exists flow(government -> residents : project_goals)
)"},
    {"P11",
     R"(rule P11 right=what_is_agreed perspective=residents-iot_service
  statement="The IoT device should not collect more data or perform actions beyond what has been consented by the residents."
  : forall d in devices: d.agreement_violated = false
)"},
    {"P12",
     R"(rule P12 right=authority perspective=residents-iot_service
  statement="Residents should have the legitimate authority to request actions to avoid undesirable or unlawful outcomes caused by the IoT service."
  : forall r in resident_groups: r.has_legitimate_authority = true
)"},
    {"P13",
     R"(rule P13 right=authority perspective=residents-government
  statement="Government should oversight or enforce minimum safety standards for the IoT device, or increase security in public to protect the safety, privacy, and well-being of residents."
  : forall g in governments:
      g.oversight_iot_safety = true and g.enforce_safety_standards = true
)"},
};

constexpr std::string_view kSafetyAssertionSource =
    R"(rule SafetyPrinciple right=safety perspective=residents-iot_service
  statement="A device that is not hazardous must not interact with residents physically."
  : forall d in devices:
      d.movement_type != hazardous implies d.interaction_type != physical
)";

}  // namespace

const RuleDef* RuleSet::find(std::string_view id) const {
    for (const RuleDef& rule : rules)
        if (token_eq(rule.id, id)) return &rule;
    return nullptr;
}

const RuleSet& builtin_ruleset() {
    static const RuleSet set = [] {
        RuleSet s;
        s.name = "EthicalPrinciples";
        for (const auto& entry : kBuiltinSources) {
            s.rules.push_back(parse_rule(entry.source));
        }
        return s;
    }();
    return set;
}

std::string rule_source(std::string_view id) {
    for (const auto& entry : kBuiltinSources) {
        if (token_eq(entry.id, id)) return std::string(entry.source);
    }
    if (token_eq(id, "SafetyPrinciple")) return std::string(kSafetyAssertionSource);
    throw UnknownRuleError(id);
}

const RuleDef& safety_assertion() {
    static const RuleDef rule = parse_rule(kSafetyAssertionSource);
    return rule;
}

const RuleDef& builtin_rule(std::string_view id) {
    if (token_eq(id, "SafetyPrinciple")) return safety_assertion();
    if (const RuleDef* rule = builtin_ruleset().find(id)) return *rule;
    throw UnknownRuleError(id);
}

}  // namespace civitas
