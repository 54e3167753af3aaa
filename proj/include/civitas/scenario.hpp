#pragma once

#include <string>
#include <string_view>

#include "civitas/diagnostics.hpp"
#include "civitas/model.hpp"

namespace civitas {

// The `.city` scenario language. Brace-blocked, line-comment '#', UTF-8,
// LF or CRLF. See render_scenario for the canonical layout.
//
//   scenario "<name>" {
//     device <tok> {
//       title: "<text>"
//       neighborhoods: [a, b]
//       movement: stationary        # still|stationary, mobile, hazardous
//       interaction: physical       # physical, non_physical
//       risk: high                  # low, medium, high
//       collects_resident_data: true
//       transmits_harmful: false
//       agreement_violated: false
//     }
//     residents <tok> { living: [...] favored: [...] economic_status: [...]
//                       professions: [...] preferences: [...]
//                       has_legitimate_authority: true }
//     government <tok> { gov_type: "..." goals: [...]
//                        oversight_iot_safety: true
//                        enforce_safety_standards: true }
//     business <tok> { scale: large neighborhoods: [...] business_types: [...] }
//     flow <src> -> <dst> : <payload> [consent=granted|denied]
//     flows_complete: false
//     total_neighborhoods: 10
//   }

/// Parses and validates a scenario. Throws ParseError (with a source span)
/// on syntax errors, unknown enum values, and validation failures.
CityModel parse_scenario(std::string_view text);

/// Canonical pretty-printed form; parse_scenario(render_scenario(m)) == m.
std::string render_scenario(const CityModel& model);

// The `.facts` override language, one fact per line:
//   flow <src> -> <dst> : <payload> [consent=granted|denied]
//   set <entity>.<field> = <value>
FactSet parse_facts(std::string_view text);

}  // namespace civitas
