#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "civitas/model.hpp"
#include "civitas/rules.hpp"

namespace civitas {

/// Finite bounds for counterexample search. All bounds are inclusive maxima.
struct Scope {
    std::size_t max_devices = 3;
    std::size_t max_resident_groups = 3;
    std::size_t max_governments = 3;
    std::size_t max_businesses = 3;
    std::size_t neighborhood_universe_size = 5;
    std::size_t max_flows = 4;
    std::size_t max_set_card = 3;  // bounds every set-valued field
    std::uint64_t candidate_budget = 5'000'000;
};

/// Parses the CLI form "devices=1,residents=1,neighborhoods=3,flows=2".
/// Keys: devices, residents, governments, businesses, neighborhoods, flows,
/// set_card, budget. Unmentioned keys keep their defaults.
Scope parse_scope(std::string_view spec);

struct CheckResult {
    enum class Kind { holds_within_scope, counterexample, budget_exhausted };

    Kind kind = Kind::holds_within_scope;
    std::uint64_t candidates_examined = 0;
    std::optional<CityModel> model;  // set when kind == counterexample
};

/**
 * Enumerates candidate models within the scope in a deterministic canonical
 * order and returns the first one the rule is Violated on, evaluated under a
 * closed world (flows_complete = true) so every flow atom is two-valued.
 *
 * The candidate space, which the enumeration covers exhaustively up to the
 * budget:
 *   - neighborhoods are n1..nU with the model declaring exactly U of them;
 *   - entity counts run 0..max per kind, ascending, devices varying slowest;
 *   - set-valued fields range over non-empty subsets of their alphabet of
 *     cardinality <= max_set_card (favored_neighborhoods may also be empty);
 *     free-text fields use the two-symbol alphabet {t0, t1}, government
 *     goals use {transform_physical_living_environment, t0};
 *   - several entities of one kind are generated in sorted form only, so
 *     renamings of one candidate are not revisited;
 *   - flows form sets of <= max_flows records (source, dest, payload,
 *     consent in {granted, denied}) between the first declared entity of
 *     each kind plus `external`, excluding self-flows of non-generic
 *     payloads and external-sourced project_goals.
 *
 * Internally the search skips coordinates the rule cannot observe; the
 * lexicographically least violating candidate has all such coordinates at
 * their minimum, so the result is identical to full enumeration.
 */
CheckResult find_counterexample(const RuleDef& rule, const Scope& scope);

/**
 * Greedily removes entities, flows and set elements (in reverse canonical
 * order, repeated to a fixed point) while the model keeps violating the rule
 * under closed-world evaluation and stays structurally valid. Throws
 * std::invalid_argument when the input does not violate the rule.
 */
CityModel minimize_witness(const CityModel& model, const RuleDef& rule);

}  // namespace civitas
