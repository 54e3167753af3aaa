#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "civitas/text.hpp"

namespace civitas {

// ── Domain enumerations ───────────────────────────────────────────────────

enum class EntityKind { device, residents, government, business, external };

enum class MovementType { stationary, mobile, hazardous };
enum class InteractionType { physical, non_physical };
enum class RiskType { low, medium, high };
enum class EconomicStatus { low, middle, high };
enum class BusinessScale { small, med, large };

enum class PayloadKind {
    resident_personal_data,
    resident_location,
    arrival_time,
    economic_status,
    project_goals,
    generic_message,
    harmful_content,
};

enum class Consent { granted, denied, unknown };
enum class FlowProvenance { scenario, human_override };

std::string_view to_string(EntityKind k);
std::string_view to_string(MovementType m);
std::string_view to_string(InteractionType i);
std::string_view to_string(RiskType r);
std::string_view to_string(EconomicStatus e);
std::string_view to_string(BusinessScale s);
std::string_view to_string(PayloadKind p);
std::string_view to_string(Consent c);

// Parsers accept the canonical spelling plus accepted synonyms
// ("still" -> stationary, "medium" -> middle, "non-physical" -> non_physical),
// case-insensitively. They return nullopt for anything else.
std::optional<MovementType> parse_movement(std::string_view token);
std::optional<InteractionType> parse_interaction(std::string_view token);
std::optional<RiskType> parse_risk(std::string_view token);
std::optional<EconomicStatus> parse_economic_status(std::string_view token);
std::optional<BusinessScale> parse_scale(std::string_view token);
std::optional<PayloadKind> parse_payload(std::string_view token);
std::optional<EntityKind> parse_entity_kind(std::string_view token);

std::vector<std::string> enum_values(std::string_view family);

/// The one goal token rules can match on; all other goals are free text.
inline constexpr std::string_view kGoalTransformEnvironment =
    "transform_physical_living_environment";

bool is_goal_tag(std::string_view token);

// ── Entities ──────────────────────────────────────────────────────────────

/// Interned neighborhood name. Case-preserving; equality folds case.
struct NeighborhoodId {
    std::string name;

    friend bool operator==(const NeighborhoodId& a, const NeighborhoodId& b) {
        return token_eq(a.name, b.name);
    }
};

struct EntityRef {
    EntityKind kind = EntityKind::external;
    std::string name;

    friend bool operator==(const EntityRef& a, const EntityRef& b) {
        return a.kind == b.kind && token_eq(a.name, b.name);
    }
};

struct DeviceInstance {
    std::string name;
    std::string device_title;
    std::vector<NeighborhoodId> deploy_neighborhoods;
    MovementType movement_type = MovementType::stationary;
    InteractionType interaction_type = InteractionType::physical;
    RiskType risk_type = RiskType::low;
    bool transmits_harmful = false;
    bool collects_resident_data = false;
    bool agreement_violated = false;

    friend bool operator==(const DeviceInstance&, const DeviceInstance&) = default;
};

struct ResidentGroup {
    std::string name;
    std::vector<NeighborhoodId> living_neighborhoods;
    std::vector<NeighborhoodId> favored_neighborhoods;
    std::vector<EconomicStatus> economic_status;
    std::vector<std::string> professions;
    std::vector<std::string> iot_usage_preferences;
    bool has_legitimate_authority = false;

    friend bool operator==(const ResidentGroup&, const ResidentGroup&) = default;
};

struct GovernmentInstance {
    std::string name;
    std::string gov_type;
    std::vector<std::string> project_goals;  // registered tags and free text
    bool oversight_iot_safety = false;
    bool enforce_safety_standards = false;

    friend bool operator==(const GovernmentInstance&, const GovernmentInstance&) = default;
};

struct BusinessInstance {
    std::string name;
    BusinessScale scale = BusinessScale::small;
    std::vector<NeighborhoodId> neighborhoods;
    std::vector<std::string> business_types;

    friend bool operator==(const BusinessInstance&, const BusinessInstance&) = default;
};

struct DataFlow {
    EntityRef source;
    EntityRef dest;
    PayloadKind payload = PayloadKind::generic_message;
    Consent consent = Consent::unknown;
    FlowProvenance provenance = FlowProvenance::scenario;

    friend bool operator==(const DataFlow&, const DataFlow&) = default;
};

std::string describe_flow(const DataFlow& flow);

/**
 * The full finite instance under judgment. Immutable by convention after
 * construction: every operation below is a pure function, safe to call
 * concurrently on the same model.
 */
struct CityModel {
    std::string scenario_name;
    std::vector<DeviceInstance> devices;
    std::vector<ResidentGroup> resident_groups;
    std::vector<GovernmentInstance> governments;
    std::vector<BusinessInstance> businesses;
    std::vector<DataFlow> flows;
    bool flows_complete = false;
    std::optional<std::size_t> declared_total_neighborhoods;

    friend bool operator==(const CityModel&, const CityModel&) = default;
};

/// All declared entities whose name matches, across kinds (0, 1 or more).
std::vector<EntityRef> find_entities_by_name(const CityModel& m, std::string_view name);

const DeviceInstance* find_device(const CityModel& m, std::string_view name);
const ResidentGroup* find_resident_group(const CityModel& m, std::string_view name);
const GovernmentInstance* find_government(const CityModel& m, std::string_view name);
const BusinessInstance* find_business(const CityModel& m, std::string_view name);
bool resolves(const CityModel& m, const EntityRef& ref);
std::string entity_name(const CityModel& m, EntityKind kind, std::size_t index);
std::size_t entity_count(const CityModel& m, EntityKind kind);

// ── Validation ────────────────────────────────────────────────────────────

enum class IssueKind {
    duplicate_name,
    reserved_name,
    dangling_ref,
    self_flow,
    external_goal_source,
    favored_not_living,
    empty_economic_status,
    empty_business_neighborhoods,
    universe_too_small,
};

struct ValidationIssue {
    IssueKind kind;
    std::string message;

    friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

/// All structural issues, in a deterministic order. Empty means well-formed.
std::vector<ValidationIssue> validate_model(const CityModel& model);

/// Observed neighborhood union in first-occurrence order, padded with
/// synthetic names when declared_total_neighborhoods exceeds it.
std::vector<NeighborhoodId> neighborhood_universe(const CityModel& model);

// ── Human-supplied facts ──────────────────────────────────────────────────

using FieldValue = std::variant<bool, std::string, std::vector<std::string>>;

// Facts name entities by bare name; the kind is resolved against the model
// when the facts are applied. Every entry lands as provenance human_override.

struct FlowFact {
    std::string source;
    std::string dest;
    PayloadKind payload = PayloadKind::generic_message;
    Consent consent = Consent::unknown;

    friend bool operator==(const FlowFact&, const FlowFact&) = default;
};

struct FieldOverride {
    std::string entity;
    std::string field;
    FieldValue value;

    friend bool operator==(const FieldOverride&, const FieldOverride&) = default;
};

struct FactSet {
    std::vector<FlowFact> flow_facts;
    std::vector<FieldOverride> field_overrides;

    bool empty() const { return flow_facts.empty() && field_overrides.empty(); }
    std::size_t size() const { return flow_facts.size() + field_overrides.size(); }

    friend bool operator==(const FactSet&, const FactSet&) = default;
};

class FactError : public std::runtime_error {
public:
    explicit FactError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Returns a new model with override flows appended and field overrides
/// applied; the input is untouched. Throws FactError on a dangling
/// reference, unknown field, or value of the wrong shape.
CityModel apply_facts(const CityModel& model, const FactSet& facts);

}  // namespace civitas
