#include "civitas/model.hpp"

#include <algorithm>
#include <array>

namespace civitas {

// ── Enum names and synonyms ───────────────────────────────────────────────

std::string_view to_string(EntityKind k) {
    switch (k) {
        case EntityKind::device: return "device";
        case EntityKind::residents: return "residents";
        case EntityKind::government: return "government";
        case EntityKind::business: return "business";
        case EntityKind::external: return "external";
    }
    return "?";
}

std::string_view to_string(MovementType m) {
    switch (m) {
        case MovementType::stationary: return "stationary";
        case MovementType::mobile: return "mobile";
        case MovementType::hazardous: return "hazardous";
    }
    return "?";
}

std::string_view to_string(InteractionType i) {
    return i == InteractionType::physical ? "physical" : "non_physical";
}

std::string_view to_string(RiskType r) {
    switch (r) {
        case RiskType::low: return "low";
        case RiskType::medium: return "medium";
        case RiskType::high: return "high";
    }
    return "?";
}

std::string_view to_string(EconomicStatus e) {
    switch (e) {
        case EconomicStatus::low: return "low";
        case EconomicStatus::middle: return "middle";
        case EconomicStatus::high: return "high";
    }
    return "?";
}

std::string_view to_string(BusinessScale s) {
    switch (s) {
        case BusinessScale::small: return "small";
        case BusinessScale::med: return "med";
        case BusinessScale::large: return "large";
    }
    return "?";
}

std::string_view to_string(PayloadKind p) {
    switch (p) {
        case PayloadKind::resident_personal_data: return "resident_personal_data";
        case PayloadKind::resident_location: return "resident_location";
        case PayloadKind::arrival_time: return "arrival_time";
        case PayloadKind::economic_status: return "economic_status";
        case PayloadKind::project_goals: return "project_goals";
        case PayloadKind::generic_message: return "generic_message";
        case PayloadKind::harmful_content: return "harmful_content";
    }
    return "?";
}

std::string_view to_string(Consent c) {
    switch (c) {
        case Consent::granted: return "granted";
        case Consent::denied: return "denied";
        case Consent::unknown: return "unknown";
    }
    return "?";
}

std::optional<MovementType> parse_movement(std::string_view token) {
    if (token_eq(token, "stationary") || token_eq(token, "still")) return MovementType::stationary;
    if (token_eq(token, "mobile")) return MovementType::mobile;
    if (token_eq(token, "hazardous")) return MovementType::hazardous;
    return std::nullopt;
}

std::optional<InteractionType> parse_interaction(std::string_view token) {
    if (token_eq(token, "physical")) return InteractionType::physical;
    if (token_eq(token, "non_physical") || token_eq(token, "non-physical"))
        return InteractionType::non_physical;
    return std::nullopt;
}

std::optional<RiskType> parse_risk(std::string_view token) {
    if (token_eq(token, "low")) return RiskType::low;
    if (token_eq(token, "medium")) return RiskType::medium;
    if (token_eq(token, "high")) return RiskType::high;
    return std::nullopt;
}

std::optional<EconomicStatus> parse_economic_status(std::string_view token) {
    if (token_eq(token, "low")) return EconomicStatus::low;
    if (token_eq(token, "middle") || token_eq(token, "medium")) return EconomicStatus::middle;
    if (token_eq(token, "high")) return EconomicStatus::high;
    return std::nullopt;
}

std::optional<BusinessScale> parse_scale(std::string_view token) {
    if (token_eq(token, "small")) return BusinessScale::small;
    if (token_eq(token, "med") || token_eq(token, "medium")) return BusinessScale::med;
    if (token_eq(token, "large")) return BusinessScale::large;
    return std::nullopt;
}

std::optional<PayloadKind> parse_payload(std::string_view token) {
    static constexpr std::array<PayloadKind, 7> kAll = {
        PayloadKind::resident_personal_data, PayloadKind::resident_location,
        PayloadKind::arrival_time,           PayloadKind::economic_status,
        PayloadKind::project_goals,          PayloadKind::generic_message,
        PayloadKind::harmful_content,
    };
    for (PayloadKind p : kAll) {
        if (token_eq(token, to_string(p))) return p;
    }
    return std::nullopt;
}

std::optional<EntityKind> parse_entity_kind(std::string_view token) {
    if (token_eq(token, "device") || token_eq(token, "devices")) return EntityKind::device;
    if (token_eq(token, "residents") || token_eq(token, "resident_groups"))
        return EntityKind::residents;
    if (token_eq(token, "government") || token_eq(token, "governments"))
        return EntityKind::government;
    if (token_eq(token, "business") || token_eq(token, "businesses")) return EntityKind::business;
    if (token_eq(token, "external")) return EntityKind::external;
    return std::nullopt;
}

std::vector<std::string> enum_values(std::string_view family) {
    if (family == "movement") return {"stationary", "mobile", "hazardous"};
    if (family == "interaction") return {"physical", "non_physical"};
    if (family == "risk") return {"low", "medium", "high"};
    if (family == "economic_status") return {"low", "middle", "high"};
    if (family == "scale") return {"small", "med", "large"};
    if (family == "payload")
        return {"resident_personal_data", "resident_location", "arrival_time",
                "economic_status",        "project_goals",     "generic_message",
                "harmful_content"};
    if (family == "consent") return {"granted", "denied"};
    return {};
}

bool is_goal_tag(std::string_view token) {
    return token_eq(token, kGoalTransformEnvironment);
}

// ── Lookup ────────────────────────────────────────────────────────────────

std::vector<EntityRef> find_entities_by_name(const CityModel& m, std::string_view name) {
    std::vector<EntityRef> out;
    for (const auto& d : m.devices)
        if (token_eq(d.name, name)) out.push_back({EntityKind::device, d.name});
    for (const auto& r : m.resident_groups)
        if (token_eq(r.name, name)) out.push_back({EntityKind::residents, r.name});
    for (const auto& g : m.governments)
        if (token_eq(g.name, name)) out.push_back({EntityKind::government, g.name});
    for (const auto& b : m.businesses)
        if (token_eq(b.name, name)) out.push_back({EntityKind::business, b.name});
    return out;
}

const DeviceInstance* find_device(const CityModel& m, std::string_view name) {
    for (const auto& d : m.devices)
        if (token_eq(d.name, name)) return &d;
    return nullptr;
}

const ResidentGroup* find_resident_group(const CityModel& m, std::string_view name) {
    for (const auto& r : m.resident_groups)
        if (token_eq(r.name, name)) return &r;
    return nullptr;
}

const GovernmentInstance* find_government(const CityModel& m, std::string_view name) {
    for (const auto& g : m.governments)
        if (token_eq(g.name, name)) return &g;
    return nullptr;
}

const BusinessInstance* find_business(const CityModel& m, std::string_view name) {
    for (const auto& b : m.businesses)
        if (token_eq(b.name, name)) return &b;
    return nullptr;
}

bool resolves(const CityModel& m, const EntityRef& ref) {
    switch (ref.kind) {
        case EntityKind::device: return find_device(m, ref.name) != nullptr;
        case EntityKind::residents: return find_resident_group(m, ref.name) != nullptr;
        case EntityKind::government: return find_government(m, ref.name) != nullptr;
        case EntityKind::business: return find_business(m, ref.name) != nullptr;
        case EntityKind::external: return true;
    }
    return false;
}

std::string entity_name(const CityModel& m, EntityKind kind, std::size_t index) {
    switch (kind) {
        case EntityKind::device: return m.devices.at(index).name;
        case EntityKind::residents: return m.resident_groups.at(index).name;
        case EntityKind::government: return m.governments.at(index).name;
        case EntityKind::business: return m.businesses.at(index).name;
        case EntityKind::external: return "external";
    }
    return {};
}

std::size_t entity_count(const CityModel& m, EntityKind kind) {
    switch (kind) {
        case EntityKind::device: return m.devices.size();
        case EntityKind::residents: return m.resident_groups.size();
        case EntityKind::government: return m.governments.size();
        case EntityKind::business: return m.businesses.size();
        case EntityKind::external: return 0;
    }
    return 0;
}

std::string describe_flow(const DataFlow& flow) {
    std::string out = flow.source.name;
    out += " -> ";
    out += flow.dest.name;
    out += " : ";
    out += to_string(flow.payload);
    if (flow.consent != Consent::unknown) {
        out += " consent=";
        out += to_string(flow.consent);
    }
    return out;
}

// ── Validation ────────────────────────────────────────────────────────────

namespace {

bool contains_neighborhood(const std::vector<NeighborhoodId>& set, const NeighborhoodId& n) {
    return std::find(set.begin(), set.end(), n) != set.end();
}

template <typename Entity>
void check_names(const std::vector<Entity>& entities, std::string_view kind,
                 std::vector<ValidationIssue>& issues) {
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (token_eq(entities[i].name, "external")) {
            issues.push_back({IssueKind::reserved_name,
                              std::string(kind) + " '" + entities[i].name +
                                  "' uses the reserved name 'external'"});
        }
        for (std::size_t j = i + 1; j < entities.size(); ++j) {
            if (token_eq(entities[i].name, entities[j].name)) {
                issues.push_back({IssueKind::duplicate_name,
                                  "duplicate " + std::string(kind) + " name '" +
                                      entities[j].name + "'"});
            }
        }
    }
}

}  // namespace

std::vector<ValidationIssue> validate_model(const CityModel& model) {
    std::vector<ValidationIssue> issues;

    check_names(model.devices, "device", issues);
    check_names(model.resident_groups, "residents", issues);
    check_names(model.governments, "government", issues);
    check_names(model.businesses, "business", issues);

    for (const auto& flow : model.flows) {
        for (const EntityRef* ref : {&flow.source, &flow.dest}) {
            if (!resolves(model, *ref)) {
                issues.push_back({IssueKind::dangling_ref,
                                  "flow references undeclared " +
                                      std::string(to_string(ref->kind)) + " '" + ref->name + "'"});
            }
        }
        if (flow.source == flow.dest && flow.payload != PayloadKind::generic_message) {
            issues.push_back({IssueKind::self_flow,
                              "flow from '" + flow.source.name +
                                  "' to itself carries payload " +
                                  std::string(to_string(flow.payload)) +
                                  " (only generic_message may loop)"});
        }
        if (flow.source.kind == EntityKind::external &&
            flow.payload == PayloadKind::project_goals) {
            issues.push_back({IssueKind::external_goal_source,
                              "external sources may not emit project_goals"});
        }
    }

    for (const auto& group : model.resident_groups) {
        for (const auto& fav : group.favored_neighborhoods) {
            if (!contains_neighborhood(group.living_neighborhoods, fav)) {
                issues.push_back({IssueKind::favored_not_living,
                                  "residents '" + group.name + "': favored neighborhood '" +
                                      fav.name + "' is not a living neighborhood"});
            }
        }
        if (group.economic_status.empty()) {
            issues.push_back({IssueKind::empty_economic_status,
                              "residents '" + group.name + "' has empty economic_status"});
        }
    }

    for (const auto& business : model.businesses) {
        if (business.neighborhoods.empty()) {
            issues.push_back({IssueKind::empty_business_neighborhoods,
                              "business '" + business.name + "' has no neighborhoods"});
        }
    }

    if (model.declared_total_neighborhoods) {
        std::vector<NeighborhoodId> observed;
        auto add = [&](const std::vector<NeighborhoodId>& set) {
            for (const auto& n : set)
                if (!contains_neighborhood(observed, n)) observed.push_back(n);
        };
        for (const auto& d : model.devices) add(d.deploy_neighborhoods);
        for (const auto& r : model.resident_groups) {
            add(r.living_neighborhoods);
            add(r.favored_neighborhoods);
        }
        for (const auto& b : model.businesses) add(b.neighborhoods);
        if (*model.declared_total_neighborhoods < observed.size()) {
            issues.push_back({IssueKind::universe_too_small,
                              "total_neighborhoods declares " +
                                  std::to_string(*model.declared_total_neighborhoods) +
                                  " but " + std::to_string(observed.size()) +
                                  " distinct neighborhoods are observed"});
        }
    }

    return issues;
}

std::vector<NeighborhoodId> neighborhood_universe(const CityModel& model) {
    std::vector<NeighborhoodId> universe;
    auto add = [&](const std::vector<NeighborhoodId>& set) {
        for (const auto& n : set)
            if (!contains_neighborhood(universe, n)) universe.push_back(n);
    };
    for (const auto& d : model.devices) add(d.deploy_neighborhoods);
    for (const auto& r : model.resident_groups) {
        add(r.living_neighborhoods);
        add(r.favored_neighborhoods);
    }
    for (const auto& b : model.businesses) add(b.neighborhoods);

    if (model.declared_total_neighborhoods) {
        std::size_t next = 1;
        while (universe.size() < *model.declared_total_neighborhoods) {
            NeighborhoodId synthetic{"n" + std::to_string(next++)};
            if (!contains_neighborhood(universe, synthetic)) universe.push_back(synthetic);
        }
    }
    return universe;
}

// ── Facts ─────────────────────────────────────────────────────────────────

namespace {

EntityRef resolve_fact_name(const CityModel& model, const std::string& name) {
    if (token_eq(name, "external")) return {EntityKind::external, "external"};
    auto matches = find_entities_by_name(model, name);
    if (matches.empty()) {
        throw FactError("fact references undeclared entity '" + name + "'");
    }
    if (matches.size() > 1) {
        throw FactError("fact reference '" + name + "' is ambiguous across entity kinds");
    }
    return matches.front();
}

bool want_bool(const FieldValue& v, const std::string& field) {
    if (const bool* b = std::get_if<bool>(&v)) return *b;
    throw FactError("override of '" + field + "' expects true or false");
}

std::string want_token(const FieldValue& v, const std::string& field) {
    if (const std::string* s = std::get_if<std::string>(&v)) return *s;
    throw FactError("override of '" + field + "' expects a single value");
}

std::vector<std::string> want_list(const FieldValue& v, const std::string& field) {
    if (const auto* l = std::get_if<std::vector<std::string>>(&v)) return *l;
    if (const std::string* s = std::get_if<std::string>(&v)) return {*s};
    throw FactError("override of '" + field + "' expects a list");
}

std::vector<NeighborhoodId> to_neighborhoods(const std::vector<std::string>& names) {
    std::vector<NeighborhoodId> out;
    for (const auto& n : names) {
        NeighborhoodId id{trim_copy(n)};
        if (!contains_neighborhood(out, id)) out.push_back(std::move(id));
    }
    return out;
}

template <typename T, typename Parse>
T parse_or_throw(const std::string& token, const std::string& field, Parse parse,
                 std::string_view family) {
    if (auto v = parse(token)) return *v;
    std::string msg = "override of '" + field + "': unknown value '" + token + "' (expected ";
    const auto values = enum_values(family);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) msg += ", ";
        msg += values[i];
    }
    msg += ")";
    throw FactError(msg);
}

template <typename Entity>
Entity& mutable_entity(std::vector<Entity>& entities, const std::string& name) {
    for (auto& e : entities)
        if (token_eq(e.name, name)) return e;
    throw FactError("fact references undeclared entity '" + name + "'");
}

void apply_override(CityModel& model, const FieldOverride& o) {
    const EntityRef ref = resolve_fact_name(model, o.entity);
    const std::string& f = o.field;
    auto is = [&](std::string_view canonical, std::string_view alias = {}) {
        return token_eq(f, canonical) || (!alias.empty() && token_eq(f, alias));
    };

    switch (ref.kind) {
        case EntityKind::device: {
            auto& d = mutable_entity(model.devices, ref.name);
            if (is("device_title", "title"))
                d.device_title = want_token(o.value, f);
            else if (is("deploy_neighborhoods", "neighborhoods"))
                d.deploy_neighborhoods = to_neighborhoods(want_list(o.value, f));
            else if (is("movement_type", "movement"))
                d.movement_type = parse_or_throw<MovementType>(want_token(o.value, f), f,
                                                               parse_movement, "movement");
            else if (is("interaction_type", "interaction"))
                d.interaction_type = parse_or_throw<InteractionType>(
                    want_token(o.value, f), f, parse_interaction, "interaction");
            else if (is("risk_type", "risk"))
                d.risk_type =
                    parse_or_throw<RiskType>(want_token(o.value, f), f, parse_risk, "risk");
            else if (is("transmits_harmful"))
                d.transmits_harmful = want_bool(o.value, f);
            else if (is("collects_resident_data"))
                d.collects_resident_data = want_bool(o.value, f);
            else if (is("agreement_violated"))
                d.agreement_violated = want_bool(o.value, f);
            else
                throw FactError("unknown field '" + f + "' on device '" + o.entity + "'");
            break;
        }
        case EntityKind::residents: {
            auto& r = mutable_entity(model.resident_groups, ref.name);
            if (is("living_neighborhoods", "living"))
                r.living_neighborhoods = to_neighborhoods(want_list(o.value, f));
            else if (is("favored_neighborhoods", "favored"))
                r.favored_neighborhoods = to_neighborhoods(want_list(o.value, f));
            else if (is("economic_status")) {
                r.economic_status.clear();
                for (const auto& token : want_list(o.value, f)) {
                    auto e = parse_or_throw<EconomicStatus>(token, f, parse_economic_status,
                                                            "economic_status");
                    if (std::find(r.economic_status.begin(), r.economic_status.end(), e) ==
                        r.economic_status.end())
                        r.economic_status.push_back(e);
                }
            } else if (is("professions"))
                r.professions = want_list(o.value, f);
            else if (is("iot_usage_preferences", "preferences"))
                r.iot_usage_preferences = want_list(o.value, f);
            else if (is("has_legitimate_authority"))
                r.has_legitimate_authority = want_bool(o.value, f);
            else
                throw FactError("unknown field '" + f + "' on residents '" + o.entity + "'");
            break;
        }
        case EntityKind::government: {
            auto& g = mutable_entity(model.governments, ref.name);
            if (is("gov_type"))
                g.gov_type = want_token(o.value, f);
            else if (is("project_goals", "goals"))
                g.project_goals = want_list(o.value, f);
            else if (is("oversight_iot_safety"))
                g.oversight_iot_safety = want_bool(o.value, f);
            else if (is("enforce_safety_standards"))
                g.enforce_safety_standards = want_bool(o.value, f);
            else
                throw FactError("unknown field '" + f + "' on government '" + o.entity + "'");
            break;
        }
        case EntityKind::business: {
            auto& b = mutable_entity(model.businesses, ref.name);
            if (is("scale"))
                b.scale =
                    parse_or_throw<BusinessScale>(want_token(o.value, f), f, parse_scale, "scale");
            else if (is("neighborhoods"))
                b.neighborhoods = to_neighborhoods(want_list(o.value, f));
            else if (is("business_types"))
                b.business_types = want_list(o.value, f);
            else
                throw FactError("unknown field '" + f + "' on business '" + o.entity + "'");
            break;
        }
        case EntityKind::external:
            throw FactError("cannot override fields on 'external'");
    }
}

}  // namespace

CityModel apply_facts(const CityModel& model, const FactSet& facts) {
    CityModel out = model;
    for (const auto& o : facts.field_overrides) apply_override(out, o);
    for (const auto& f : facts.flow_facts) {
        DataFlow flow;
        flow.source = resolve_fact_name(out, f.source);
        flow.dest = resolve_fact_name(out, f.dest);
        flow.payload = f.payload;
        flow.consent = f.consent;
        flow.provenance = FlowProvenance::human_override;
        if (flow.source == flow.dest && flow.payload != PayloadKind::generic_message) {
            throw FactError("fact flow from '" + f.source + "' to itself must carry generic_message");
        }
        if (flow.source.kind == EntityKind::external &&
            flow.payload == PayloadKind::project_goals) {
            throw FactError("fact flow: external sources may not emit project_goals");
        }
        out.flows.push_back(std::move(flow));
    }
    return out;
}

}  // namespace civitas
