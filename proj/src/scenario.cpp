#include "civitas/scenario.hpp"

#include <algorithm>
#include <map>

#include "lexer.hpp"

namespace civitas {

namespace {

using detail::Lexer;
using detail::Token;

std::string join(const std::vector<std::string>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += values[i];
    }
    return out;
}

struct PendingFlow {
    std::string source;
    std::string dest;
    SourceSpan source_span;
    SourceSpan dest_span;
    SourceSpan flow_span;
    PayloadKind payload = PayloadKind::generic_message;
    Consent consent = Consent::unknown;
};

class ScenarioParser {
public:
    explicit ScenarioParser(std::string_view text) : lex_(text) {}

    CityModel parse() {
        if (lex_.at_end()) throw ParseError(lex_.peek().span, "no scenario block");
        if (!accept_ident("scenario")) fail("expected 'scenario \"<name>\" { ... }'");
        if (lex_.peek().type != Token::Type::string) fail("scenario name must be a string");
        model_.scenario_name = lex_.next().text;
        expect_punct("{");
        while (!lex_.peek().is_punct("}")) {
            if (lex_.at_end()) fail("unterminated scenario block; expected '}'");
            parse_item();
        }
        lex_.next();  // '}'
        if (!lex_.at_end()) {
            fail("unexpected " + detail::token_desc(lex_.peek()) + " after scenario block");
        }
        resolve_flows();
        return std::move(model_);
    }

private:
    Lexer lex_;
    CityModel model_;
    std::vector<PendingFlow> pending_flows_;

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(lex_.peek().span, msg); }

    bool accept_ident(std::string_view word) {
        if (lex_.peek().is_ident() && token_eq(lex_.peek().text, word)) {
            lex_.next();
            return true;
        }
        return false;
    }

    void expect_punct(std::string_view p) {
        if (!lex_.peek().is_punct(p)) {
            fail("expected '" + std::string(p) + "' but found " + detail::token_desc(lex_.peek()));
        }
        lex_.next();
    }

    void parse_item() {
        const Token& t = lex_.peek();
        if (!t.is_ident()) fail("expected a declaration");
        if (token_eq(t.text, "device")) {
            parse_device();
        } else if (token_eq(t.text, "residents")) {
            parse_residents();
        } else if (token_eq(t.text, "government")) {
            parse_government();
        } else if (token_eq(t.text, "business")) {
            parse_business();
        } else if (token_eq(t.text, "flow")) {
            parse_flow();
        } else if (token_eq(t.text, "flows_complete")) {
            lex_.next();
            expect_punct(":");
            model_.flows_complete = parse_bool();
        } else if (token_eq(t.text, "total_neighborhoods")) {
            lex_.next();
            expect_punct(":");
            if (lex_.peek().type != Token::Type::integer) {
                fail("total_neighborhoods expects a number");
            }
            model_.declared_total_neighborhoods = static_cast<std::size_t>(lex_.next().int_value);
        } else {
            std::string msg = "unknown declaration '" + t.text + "'";
            if (auto hint = closest_match(
                    t.text, {"device", "residents", "government", "business", "flow",
                             "flows_complete", "total_neighborhoods"})) {
                msg += "; did you mean '" + *hint + "'?";
            }
            fail(msg);
        }
    }

    std::string parse_entity_name(std::string_view kind) {
        if (!lex_.peek().is_ident()) {
            fail(std::string(kind) + " name must be a bare token");
        }
        Token name = lex_.next();
        if (token_eq(name.text, "external")) {
            throw ParseError(name.span, "'external' is reserved and cannot name an entity");
        }
        if (!find_entities_by_name(model_, name.text).empty()) {
            // Names may repeat across kinds, not within one.
            for (const auto& ref : find_entities_by_name(model_, name.text)) {
                if (token_eq(to_string(ref.kind), kind)) {
                    throw ParseError(name.span,
                                     "duplicate " + std::string(kind) + " name '" + name.text + "'");
                }
            }
        }
        return name.text;
    }

    bool parse_bool() {
        if (lex_.peek().is_ident()) {
            Token t = lex_.next();
            if (token_eq(t.text, "true")) return true;
            if (token_eq(t.text, "false")) return false;
            throw ParseError(t.span, "expected true or false, found '" + t.text + "'");
        }
        fail("expected true or false");
    }

    std::string parse_text_value() {
        const Token& t = lex_.peek();
        if (t.type == Token::Type::string || t.is_ident()) return lex_.next().text;
        fail("expected a token or quoted string");
    }

    std::vector<std::string> parse_list() {
        expect_punct("[");
        std::vector<std::string> out;
        if (lex_.peek().is_punct("]")) {
            lex_.next();
            return out;
        }
        while (true) {
            const Token& t = lex_.peek();
            if (t.is_ident() || t.type == Token::Type::string) {
                out.push_back(lex_.next().text);
            } else if (t.type == Token::Type::integer) {
                out.push_back(lex_.next().text);
            } else {
                fail("expected a list element");
            }
            if (lex_.peek().is_punct(",")) {
                lex_.next();
                continue;
            }
            break;
        }
        expect_punct("]");
        return out;
    }

    std::vector<NeighborhoodId> parse_neighborhood_list(SourceSpan span) {
        std::vector<NeighborhoodId> out;
        for (const auto& raw : parse_list()) {
            NeighborhoodId id{trim_copy(raw)};
            if (id.name.empty()) throw ParseError(span, "neighborhood names must be non-empty");
            if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(std::move(id));
        }
        return out;
    }

    template <typename T, typename Parse>
    T parse_enum_value(Parse parse, std::string_view family) {
        Token t = lex_.peek();
        const std::string raw = parse_text_value();
        if (auto v = parse(raw)) return *v;
        std::string msg = "unknown " + std::string(family) + " value '" + raw + "' (expected " +
                          join(enum_values(family)) + ")";
        if (auto hint = closest_match(raw, enum_values(family))) {
            msg += "; did you mean '" + *hint + "'?";
        }
        throw ParseError(t.span, msg);
    }

    // Tracks which keys a block has seen, with duplicate/missing diagnostics.
    class BlockKeys {
    public:
        BlockKeys(ScenarioParser& parser, std::string kind) : parser_(parser), kind_(std::move(kind)) {}

        bool starts(std::string_view canonical, std::string_view alias, const Token& key) {
            if (!token_eq(key.text, canonical) && (alias.empty() || !token_eq(key.text, alias)))
                return false;
            if (std::find(seen_.begin(), seen_.end(), canonical) != seen_.end()) {
                throw ParseError(key.span, "duplicate field '" + key.text + "' in " + kind_ +
                                               " block");
            }
            seen_.emplace_back(canonical);
            parser_.lex_.next();
            parser_.expect_punct(":");
            return true;
        }

        void require(std::initializer_list<std::string_view> keys, SourceSpan span) {
            std::vector<std::string> missing;
            for (auto k : keys) {
                if (std::find(seen_.begin(), seen_.end(), k) == seen_.end())
                    missing.emplace_back(k);
            }
            if (!missing.empty()) {
                throw ParseError(span, kind_ + " block is missing required field" +
                                           (missing.size() > 1 ? "s" : "") + ": " + join(missing));
            }
        }

    private:
        ScenarioParser& parser_;
        std::string kind_;
        std::vector<std::string> seen_;
    };

    [[noreturn]] void unknown_field(const Token& key, std::string_view kind,
                                    const std::vector<std::string>& known) {
        std::string msg = "unknown field '" + key.text + "' in " + std::string(kind) + " block";
        if (auto hint = closest_match(key.text, known)) msg += "; did you mean '" + *hint + "'?";
        throw ParseError(key.span, msg);
    }

    void parse_device() {
        const SourceSpan block_span = lex_.peek().span;
        lex_.next();
        DeviceInstance d;
        d.name = parse_entity_name("device");
        expect_punct("{");
        BlockKeys keys(*this, "device");
        while (!lex_.peek().is_punct("}")) {
            const Token key = lex_.peek();
            if (!key.is_ident()) fail("expected a field name");
            if (keys.starts("title", "device_title", key)) {
                d.device_title = parse_text_value();
            } else if (keys.starts("neighborhoods", "deploy_neighborhoods", key)) {
                d.deploy_neighborhoods = parse_neighborhood_list(key.span);
            } else if (keys.starts("movement", "movement_type", key)) {
                d.movement_type = parse_enum_value<MovementType>(parse_movement, "movement");
            } else if (keys.starts("interaction", "interaction_type", key)) {
                d.interaction_type =
                    parse_enum_value<InteractionType>(parse_interaction, "interaction");
            } else if (keys.starts("risk", "risk_type", key)) {
                d.risk_type = parse_enum_value<RiskType>(parse_risk, "risk");
            } else if (keys.starts("collects_resident_data", "", key)) {
                d.collects_resident_data = parse_bool();
            } else if (keys.starts("transmits_harmful", "", key)) {
                d.transmits_harmful = parse_bool();
            } else if (keys.starts("agreement_violated", "", key)) {
                d.agreement_violated = parse_bool();
            } else {
                unknown_field(key, "device",
                              {"title", "neighborhoods", "movement", "interaction", "risk",
                               "collects_resident_data", "transmits_harmful",
                               "agreement_violated"});
            }
        }
        lex_.next();  // '}'
        keys.require({"title", "neighborhoods", "movement", "interaction", "risk",
                      "collects_resident_data", "transmits_harmful", "agreement_violated"},
                     block_span);
        model_.devices.push_back(std::move(d));
    }

    void parse_residents() {
        const SourceSpan block_span = lex_.peek().span;
        lex_.next();
        ResidentGroup r;
        r.name = parse_entity_name("residents");
        expect_punct("{");
        BlockKeys keys(*this, "residents");
        SourceSpan econ_span = block_span;
        SourceSpan favored_span = block_span;
        while (!lex_.peek().is_punct("}")) {
            const Token key = lex_.peek();
            if (!key.is_ident()) fail("expected a field name");
            if (keys.starts("living", "living_neighborhoods", key)) {
                r.living_neighborhoods = parse_neighborhood_list(key.span);
            } else if (keys.starts("favored", "favored_neighborhoods", key)) {
                favored_span = key.span;
                r.favored_neighborhoods = parse_neighborhood_list(key.span);
            } else if (keys.starts("economic_status", "", key)) {
                econ_span = key.span;
                for (const auto& raw : parse_list()) {
                    auto e = parse_economic_status(raw);
                    if (!e) {
                        std::string msg = "unknown economic_status value '" + raw +
                                          "' (expected " + join(enum_values("economic_status")) +
                                          ")";
                        throw ParseError(key.span, msg);
                    }
                    if (std::find(r.economic_status.begin(), r.economic_status.end(), *e) ==
                        r.economic_status.end())
                        r.economic_status.push_back(*e);
                }
            } else if (keys.starts("professions", "", key)) {
                r.professions = parse_list();
            } else if (keys.starts("preferences", "iot_usage_preferences", key)) {
                r.iot_usage_preferences = parse_list();
            } else if (keys.starts("has_legitimate_authority", "", key)) {
                r.has_legitimate_authority = parse_bool();
            } else {
                unknown_field(key, "residents",
                              {"living", "favored", "economic_status", "professions",
                               "preferences", "has_legitimate_authority"});
            }
        }
        lex_.next();
        keys.require({"living", "economic_status", "preferences", "has_legitimate_authority"},
                     block_span);
        if (r.economic_status.empty()) {
            throw ParseError(econ_span, "economic_status must list at least one value");
        }
        for (const auto& fav : r.favored_neighborhoods) {
            if (std::find(r.living_neighborhoods.begin(), r.living_neighborhoods.end(), fav) ==
                r.living_neighborhoods.end()) {
                throw ParseError(favored_span, "favored neighborhood '" + fav.name +
                                                   "' is not in the living set");
            }
        }
        model_.resident_groups.push_back(std::move(r));
    }

    void parse_government() {
        const SourceSpan block_span = lex_.peek().span;
        lex_.next();
        GovernmentInstance g;
        g.name = parse_entity_name("government");
        expect_punct("{");
        BlockKeys keys(*this, "government");
        while (!lex_.peek().is_punct("}")) {
            const Token key = lex_.peek();
            if (!key.is_ident()) fail("expected a field name");
            if (keys.starts("gov_type", "", key)) {
                g.gov_type = parse_text_value();
            } else if (keys.starts("goals", "project_goals", key)) {
                g.project_goals = parse_list();
            } else if (keys.starts("oversight_iot_safety", "", key)) {
                g.oversight_iot_safety = parse_bool();
            } else if (keys.starts("enforce_safety_standards", "", key)) {
                g.enforce_safety_standards = parse_bool();
            } else {
                unknown_field(key, "government",
                              {"gov_type", "goals", "oversight_iot_safety",
                               "enforce_safety_standards"});
            }
        }
        lex_.next();
        keys.require({"gov_type", "goals", "oversight_iot_safety", "enforce_safety_standards"},
                     block_span);
        model_.governments.push_back(std::move(g));
    }

    void parse_business() {
        const SourceSpan block_span = lex_.peek().span;
        lex_.next();
        BusinessInstance b;
        b.name = parse_entity_name("business");
        expect_punct("{");
        BlockKeys keys(*this, "business");
        SourceSpan nb_span = block_span;
        while (!lex_.peek().is_punct("}")) {
            const Token key = lex_.peek();
            if (!key.is_ident()) fail("expected a field name");
            if (keys.starts("scale", "", key)) {
                b.scale = parse_enum_value<BusinessScale>(parse_scale, "scale");
            } else if (keys.starts("neighborhoods", "", key)) {
                nb_span = key.span;
                b.neighborhoods = parse_neighborhood_list(key.span);
            } else if (keys.starts("business_types", "", key)) {
                b.business_types = parse_list();
            } else {
                unknown_field(key, "business", {"scale", "neighborhoods", "business_types"});
            }
        }
        lex_.next();
        keys.require({"scale", "neighborhoods", "business_types"}, block_span);
        if (b.neighborhoods.empty()) {
            throw ParseError(nb_span, "business neighborhoods must list at least one value");
        }
        model_.businesses.push_back(std::move(b));
    }

    void parse_flow() {
        PendingFlow flow;
        flow.flow_span = lex_.peek().span;
        lex_.next();
        flow.source_span = lex_.peek().span;
        if (!lex_.peek().is_ident()) fail("flow source must be an entity name");
        flow.source = lex_.next().text;
        expect_punct("->");
        flow.dest_span = lex_.peek().span;
        if (!lex_.peek().is_ident()) fail("flow destination must be an entity name");
        flow.dest = lex_.next().text;
        expect_punct(":");
        Token p = lex_.peek();
        const std::string raw = parse_text_value();
        auto payload = parse_payload(raw);
        if (!payload) {
            std::string msg = "unknown payload '" + raw + "' (expected " +
                              join(enum_values("payload")) + ")";
            if (auto hint = closest_match(raw, enum_values("payload"))) {
                msg += "; did you mean '" + *hint + "'?";
            }
            throw ParseError(p.span, msg);
        }
        flow.payload = *payload;
        if (lex_.peek().is_ident() && token_eq(lex_.peek().text, "consent")) {
            lex_.next();
            expect_punct("=");
            Token c = lex_.peek();
            const std::string consent = parse_text_value();
            if (token_eq(consent, "granted"))
                flow.consent = Consent::granted;
            else if (token_eq(consent, "denied"))
                flow.consent = Consent::denied;
            else
                throw ParseError(c.span, "consent must be granted or denied (omit for unknown)");
        }
        pending_flows_.push_back(std::move(flow));
    }

    EntityRef resolve_endpoint(const std::string& name, SourceSpan span) {
        if (token_eq(name, "external")) return {EntityKind::external, "external"};
        auto matches = find_entities_by_name(model_, name);
        if (matches.empty()) {
            throw ParseError(span, "flow references undeclared entity '" + name + "'");
        }
        if (matches.size() > 1) {
            throw ParseError(span, "flow endpoint '" + name +
                                       "' is ambiguous; the name is declared for more than one "
                                       "entity kind");
        }
        return matches.front();
    }

    void resolve_flows() {
        for (const auto& pending : pending_flows_) {
            DataFlow flow;
            flow.source = resolve_endpoint(pending.source, pending.source_span);
            flow.dest = resolve_endpoint(pending.dest, pending.dest_span);
            flow.payload = pending.payload;
            flow.consent = pending.consent;
            flow.provenance = FlowProvenance::scenario;
            if (flow.source == flow.dest && flow.payload != PayloadKind::generic_message) {
                throw ParseError(pending.flow_span,
                                 "a flow from an entity to itself may only carry generic_message");
            }
            if (flow.source.kind == EntityKind::external &&
                flow.payload == PayloadKind::project_goals) {
                throw ParseError(pending.flow_span,
                                 "external sources may not emit project_goals");
            }
            model_.flows.push_back(std::move(flow));
        }
        if (model_.declared_total_neighborhoods) {
            CityModel probe = model_;
            probe.declared_total_neighborhoods.reset();
            const std::size_t observed = neighborhood_universe(probe).size();
            if (*model_.declared_total_neighborhoods < observed) {
                throw ParseError({1, 1, 1},
                                 "total_neighborhoods declares " +
                                     std::to_string(*model_.declared_total_neighborhoods) +
                                     " but " + std::to_string(observed) +
                                     " distinct neighborhoods are observed");
            }
        }
    }
};

// ── Rendering ─────────────────────────────────────────────────────────────

void render_list(std::string& out, const std::vector<std::string>& values) {
    out += "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += render_token(values[i]);
    }
    out += "]";
}

void render_neighborhoods(std::string& out, const std::vector<NeighborhoodId>& values) {
    out += "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += render_token(values[i].name);
    }
    out += "]";
}

}  // namespace

CityModel parse_scenario(std::string_view text) { return ScenarioParser(text).parse(); }

std::string render_scenario(const CityModel& model) {
    std::string out = "scenario " + quote_string(model.scenario_name) + " {\n";
    auto line = [&out](int indent, std::string_view text) {
        out.append(static_cast<std::size_t>(indent) * 2, ' ');
        out += text;
        out += "\n";
    };
    auto bool_str = [](bool b) { return b ? "true" : "false"; };

    for (const auto& d : model.devices) {
        line(1, "device " + d.name + " {");
        line(2, "title: " + quote_string(d.device_title));
        std::string nb = "neighborhoods: ";
        render_neighborhoods(nb, d.deploy_neighborhoods);
        line(2, nb);
        line(2, "movement: " + std::string(to_string(d.movement_type)));
        line(2, "interaction: " + std::string(to_string(d.interaction_type)));
        line(2, "risk: " + std::string(to_string(d.risk_type)));
        line(2, std::string("collects_resident_data: ") + bool_str(d.collects_resident_data));
        line(2, std::string("transmits_harmful: ") + bool_str(d.transmits_harmful));
        line(2, std::string("agreement_violated: ") + bool_str(d.agreement_violated));
        line(1, "}");
    }
    for (const auto& r : model.resident_groups) {
        line(1, "residents " + r.name + " {");
        std::string living = "living: ";
        render_neighborhoods(living, r.living_neighborhoods);
        line(2, living);
        if (!r.favored_neighborhoods.empty()) {
            std::string fav = "favored: ";
            render_neighborhoods(fav, r.favored_neighborhoods);
            line(2, fav);
        }
        std::string econ = "economic_status: [";
        for (std::size_t i = 0; i < r.economic_status.size(); ++i) {
            if (i) econ += ", ";
            econ += to_string(r.economic_status[i]);
        }
        econ += "]";
        line(2, econ);
        if (!r.professions.empty()) {
            std::string prof = "professions: ";
            render_list(prof, r.professions);
            line(2, prof);
        }
        std::string pref = "preferences: ";
        render_list(pref, r.iot_usage_preferences);
        line(2, pref);
        line(2, std::string("has_legitimate_authority: ") +
                    bool_str(r.has_legitimate_authority));
        line(1, "}");
    }
    for (const auto& g : model.governments) {
        line(1, "government " + g.name + " {");
        line(2, "gov_type: " + quote_string(g.gov_type));
        std::string goals = "goals: ";
        render_list(goals, g.project_goals);
        line(2, goals);
        line(2, std::string("oversight_iot_safety: ") + bool_str(g.oversight_iot_safety));
        line(2, std::string("enforce_safety_standards: ") + bool_str(g.enforce_safety_standards));
        line(1, "}");
    }
    for (const auto& b : model.businesses) {
        line(1, "business " + b.name + " {");
        line(2, "scale: " + std::string(to_string(b.scale)));
        std::string nb = "neighborhoods: ";
        render_neighborhoods(nb, b.neighborhoods);
        line(2, nb);
        std::string types = "business_types: ";
        render_list(types, b.business_types);
        line(2, types);
        line(1, "}");
    }
    for (const auto& flow : model.flows) {
        std::string f = "flow " + flow.source.name + " -> " + flow.dest.name + " : " +
                        std::string(to_string(flow.payload));
        if (flow.consent != Consent::unknown) {
            f += " consent=";
            f += to_string(flow.consent);
        }
        line(1, f);
    }
    if (model.flows_complete) line(1, "flows_complete: true");
    if (model.declared_total_neighborhoods) {
        line(1, "total_neighborhoods: " + std::to_string(*model.declared_total_neighborhoods));
    }
    out += "}\n";
    return out;
}

// ── Facts ─────────────────────────────────────────────────────────────────

FactSet parse_facts(std::string_view text) {
    Lexer lex(text);
    FactSet facts;
    auto expect_punct = [&lex](std::string_view p) {
        if (!lex.peek().is_punct(p)) {
            throw ParseError(lex.peek().span, "expected '" + std::string(p) + "' but found " +
                                                  detail::token_desc(lex.peek()));
        }
        lex.next();
    };
    while (!lex.at_end()) {
        const Token& t = lex.peek();
        if (!t.is_ident()) {
            throw ParseError(t.span, "expected 'flow' or 'set'");
        }
        if (token_eq(t.text, "flow")) {
            lex.next();
            FlowFact flow;
            if (!lex.peek().is_ident())
                throw ParseError(lex.peek().span, "flow source must be an entity name");
            flow.source = lex.next().text;
            expect_punct("->");
            if (!lex.peek().is_ident())
                throw ParseError(lex.peek().span, "flow destination must be an entity name");
            flow.dest = lex.next().text;
            expect_punct(":");
            const Token p = lex.peek();
            if (!p.is_ident() && p.type != Token::Type::string)
                throw ParseError(p.span, "expected a payload kind");
            auto payload = parse_payload(lex.next().text);
            if (!payload) {
                throw ParseError(p.span, "unknown payload '" + p.text + "' (expected " +
                                             join(enum_values("payload")) + ")");
            }
            flow.payload = *payload;
            if (lex.peek().is_ident() && token_eq(lex.peek().text, "consent")) {
                lex.next();
                expect_punct("=");
                const Token c = lex.peek();
                if (!c.is_ident()) throw ParseError(c.span, "consent must be granted or denied");
                const std::string consent = lex.next().text;
                if (token_eq(consent, "granted"))
                    flow.consent = Consent::granted;
                else if (token_eq(consent, "denied"))
                    flow.consent = Consent::denied;
                else
                    throw ParseError(c.span,
                                     "consent must be granted or denied (omit for unknown)");
            }
            facts.flow_facts.push_back(std::move(flow));
        } else if (token_eq(t.text, "set")) {
            lex.next();
            FieldOverride o;
            if (!lex.peek().is_ident())
                throw ParseError(lex.peek().span, "expected an entity name after 'set'");
            const Token entity = lex.next();
            o.entity = entity.text;
            expect_punct(".");
            if (!lex.peek().is_ident())
                throw ParseError(lex.peek().span, "expected a field name");
            o.field = lex.next().text;
            expect_punct("=");
            const Token& v = lex.peek();
            if (v.is_punct("[")) {
                std::vector<std::string> list;
                lex.next();
                if (!lex.peek().is_punct("]")) {
                    while (true) {
                        const Token& e = lex.peek();
                        if (e.is_ident() || e.type == Token::Type::string ||
                            e.type == Token::Type::integer) {
                            list.push_back(lex.next().text);
                        } else {
                            throw ParseError(e.span, "expected a list element");
                        }
                        if (lex.peek().is_punct(",")) {
                            lex.next();
                            continue;
                        }
                        break;
                    }
                }
                expect_punct("]");
                o.value = std::move(list);
            } else if (v.is_ident() &&
                       (token_eq(v.text, "true") || token_eq(v.text, "false"))) {
                o.value = token_eq(lex.next().text, "true");
            } else if (v.is_ident() || v.type == Token::Type::string) {
                o.value = lex.next().text;
            } else if (v.type == Token::Type::integer) {
                o.value = lex.next().text;
            } else {
                throw ParseError(v.span, "expected a value");
            }
            for (const auto& prev : facts.field_overrides) {
                if (token_eq(prev.entity, o.entity) && token_eq(prev.field, o.field)) {
                    throw ParseError(entity.span, "conflicting override of '" + o.entity + "." +
                                                      o.field + "'");
                }
            }
            facts.field_overrides.push_back(std::move(o));
        } else {
            throw ParseError(t.span, "expected 'flow' or 'set', found '" + t.text + "'");
        }
    }
    return facts;
}

}  // namespace civitas
