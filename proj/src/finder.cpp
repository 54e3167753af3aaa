#include "civitas/finder.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>

namespace civitas {

// ── Scope parsing ─────────────────────────────────────────────────────────

Scope parse_scope(std::string_view spec) {
    Scope scope;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t comma = spec.find(',', pos);
        if (comma == std::string_view::npos) comma = spec.size();
        std::string_view item = spec.substr(pos, comma - pos);
        pos = comma + 1;
        if (trim_copy(item).empty()) continue;
        const std::size_t eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument("scope item '" + std::string(item) +
                                        "' is not key=value");
        }
        const std::string key = trim_copy(item.substr(0, eq));
        const std::string value = trim_copy(item.substr(eq + 1));
        std::uint64_t n = 0;
        try {
            std::size_t used = 0;
            n = std::stoull(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw std::invalid_argument("scope value for '" + key + "' must be a number");
        }
        if (token_eq(key, "devices"))
            scope.max_devices = n;
        else if (token_eq(key, "residents"))
            scope.max_resident_groups = n;
        else if (token_eq(key, "governments"))
            scope.max_governments = n;
        else if (token_eq(key, "businesses"))
            scope.max_businesses = n;
        else if (token_eq(key, "neighborhoods"))
            scope.neighborhood_universe_size = n;
        else if (token_eq(key, "flows"))
            scope.max_flows = n;
        else if (token_eq(key, "set_card"))
            scope.max_set_card = n;
        else if (token_eq(key, "budget"))
            scope.candidate_budget = n;
        else
            throw std::invalid_argument(
                "unknown scope key '" + key +
                "' (expected devices, residents, governments, businesses, neighborhoods, "
                "flows, set_card, budget)");
    }
    if (scope.candidate_budget == 0) {
        throw std::invalid_argument("scope budget must be at least 1");
    }
    return scope;
}

namespace {

// ── What a rule can observe ───────────────────────────────────────────────

struct RuleNeeds {
    std::array<bool, 4> kind_used{};  // device, residents, government, business
    std::set<Field> fields;
    bool uses_flows = false;
    bool consent_matters = false;
    std::set<PayloadKind> payloads;
    std::vector<FlowAtom> flow_atoms;

    bool reads(Field f) const { return fields.count(f) != 0; }
};

std::size_t kind_slot(EntityKind k) { return static_cast<std::size_t>(k); }

void mark_kind(RuleNeeds& needs, EntityKind k) {
    if (k != EntityKind::external) needs.kind_used[kind_slot(k)] = true;
}

void analyze_term(RuleNeeds& needs, const Term& term) {
    if (const auto* f = std::get_if<FieldRef>(&term)) {
        needs.fields.insert(f->field);
        mark_kind(needs, field_info(f->field).kind);
    } else if (const auto* card = std::get_if<CardTerm>(&term)) {
        if (card->set) {
            needs.fields.insert(card->set->field);
            mark_kind(needs, field_info(card->set->field).kind);
        }
    }
}

void analyze(RuleNeeds& needs, const ExprPtr& e) {
    if (const auto* q = std::get_if<Quantified>(&e->node)) {
        mark_kind(needs, q->domain);
        analyze(needs, q->body);
    } else if (const auto* c = std::get_if<Connective>(&e->node)) {
        for (const auto& op : c->operands) analyze(needs, op);
    } else if (const auto* n = std::get_if<Negation>(&e->node)) {
        analyze(needs, n->operand);
    } else if (const auto* cmp = std::get_if<CompareExpr>(&e->node)) {
        analyze_term(needs, cmp->lhs);
        analyze_term(needs, cmp->rhs);
    } else if (const auto* m = std::get_if<MemberExpr>(&e->node)) {
        analyze_term(needs, m->element);
        if (m->set_field) {
            needs.fields.insert(m->set_field->field);
            mark_kind(needs, field_info(m->set_field->field).kind);
        }
    } else if (const auto* f = std::get_if<FlowAtom>(&e->node)) {
        needs.uses_flows = true;
        needs.payloads.insert(f->payload);
        needs.consent_matters |= f->consent != ConsentPattern::any;
        if (f->source) mark_kind(needs, *f->source);
        if (f->dest) mark_kind(needs, *f->dest);
        needs.flow_atoms.push_back(*f);
    } else if (const auto* b = std::get_if<BoolField>(&e->node)) {
        needs.fields.insert(b->ref.field);
        mark_kind(needs, field_info(b->ref.field).kind);
    }
}

// ── Canonical value domains ───────────────────────────────────────────────

// Non-empty subsets of [0..n) with at most `cap` elements, as sorted index
// lists in lexicographic order; optionally the empty set first.
std::vector<std::vector<std::size_t>> subset_lists(std::size_t n, std::size_t cap,
                                                   bool include_empty) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> current;
    if (include_empty) out.push_back(current);
    auto dfs = [&](auto&& self, std::size_t start) -> void {
        for (std::size_t i = start; i < n; ++i) {
            current.push_back(i);
            out.push_back(current);
            if (current.size() < cap) self(self, i + 1);
            current.pop_back();
        }
    };
    if (cap > 0) dfs(dfs, 0);
    return out;
}

const std::vector<std::string>& text_alphabet() {
    static const std::vector<std::string> alphabet = {"t0", "t1"};
    return alphabet;
}

const std::vector<std::string>& goal_alphabet() {
    static const std::vector<std::string> alphabet = {std::string(kGoalTransformEnvironment),
                                                      "t0"};
    return alphabet;
}

std::vector<NeighborhoodId> universe_names(std::size_t n) {
    std::vector<NeighborhoodId> out;
    out.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) out.push_back({"n" + std::to_string(i)});
    return out;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& names, const std::vector<std::size_t>& indices) {
    std::vector<T> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(names[i]);
    return out;
}

// Keeps the first element only when the rule cannot observe the dimension.
template <typename T>
std::vector<T> maybe_pin(std::vector<T> options, bool relevant) {
    if (!relevant && options.size() > 1) options.resize(1);
    return options;
}

// ── The search ────────────────────────────────────────────────────────────

class Searcher {
public:
    Searcher(const RuleDef& rule, const Scope& scope) : rule_(rule), scope_(scope) {
        analyze(needs_, rule.expr);
        build_tables();
        model_.scenario_name = "counterexample";
        model_.flows_complete = true;
        model_.declared_total_neighborhoods = scope.neighborhood_universe_size;
    }

    CheckResult run() {
        const std::array<std::size_t, 4> upper = {
            count_upper(0, scope_.max_devices, devices_.size()),
            count_upper(1, scope_.max_resident_groups, residents_.size()),
            count_upper(2, scope_.max_governments, governments_.size()),
            count_upper(3, scope_.max_businesses, businesses_.size()),
        };
        bool stop = false;
        for (counts_[0] = 0; counts_[0] <= upper[0] && !stop; ++counts_[0]) {
            for (counts_[1] = 0; counts_[1] <= upper[1] && !stop; ++counts_[1]) {
                for (counts_[2] = 0; counts_[2] <= upper[2] && !stop; ++counts_[2]) {
                    for (counts_[3] = 0; counts_[3] <= upper[3] && !stop; ++counts_[3]) {
                        model_.devices.resize(counts_[0]);
                        model_.resident_groups.resize(counts_[1]);
                        model_.governments.resize(counts_[2]);
                        model_.businesses.resize(counts_[3]);
                        stop = assign_kind<0>(0, 0);
                    }
                }
            }
        }
        CheckResult result;
        result.candidates_examined = examined_;
        if (found_) {
            result.kind = CheckResult::Kind::counterexample;
            result.model = std::move(found_);
        } else if (exhausted_) {
            result.kind = CheckResult::Kind::budget_exhausted;
        } else {
            result.kind = CheckResult::Kind::holds_within_scope;
        }
        return result;
    }

private:
    const RuleDef& rule_;
    const Scope& scope_;
    RuleNeeds needs_;
    std::vector<DeviceInstance> devices_;
    std::vector<ResidentGroup> residents_;
    std::vector<GovernmentInstance> governments_;
    std::vector<BusinessInstance> businesses_;
    std::array<std::size_t, 4> counts_{};
    CityModel model_;
    std::vector<DataFlow> flow_space_;
    std::uint64_t examined_ = 0;
    bool exhausted_ = false;
    std::optional<CityModel> found_;

    std::size_t count_upper(std::size_t slot, std::size_t max, std::size_t table_size) const {
        if (!needs_.kind_used[slot] || table_size == 0) return 0;
        return max;
    }

    void build_tables() {
        const std::size_t universe = scope_.neighborhood_universe_size;
        const std::size_t cap = scope_.max_set_card;
        const auto neighborhoods = universe_names(universe);
        const auto nb_subsets = subset_lists(universe, std::min(cap, universe), false);
        const auto pair_subsets = subset_lists(2, std::min<std::size_t>(cap, 2), false);
        const auto econ_subsets = subset_lists(3, std::min<std::size_t>(cap, 3), false);

        {  // devices: title, deploy, movement, interaction, risk, collects,
           // transmits, agreement
            const auto titles = maybe_pin(text_alphabet(), needs_.reads(Field::device_title));
            const auto deploys = maybe_pin(nb_subsets, needs_.reads(Field::deploy_neighborhoods));
            const auto movements = maybe_pin(
                std::vector<MovementType>{MovementType::stationary, MovementType::mobile,
                                          MovementType::hazardous},
                needs_.reads(Field::movement_type));
            const auto interactions = maybe_pin(
                std::vector<InteractionType>{InteractionType::physical,
                                             InteractionType::non_physical},
                needs_.reads(Field::interaction_type));
            const auto risks =
                maybe_pin(std::vector<RiskType>{RiskType::low, RiskType::medium, RiskType::high},
                          needs_.reads(Field::risk_type));
            const auto bools = [this](Field f) {
                return maybe_pin(std::vector<bool>{false, true}, needs_.reads(f));
            };
            for (const auto& title : titles)
                for (const auto& deploy : deploys)
                    for (auto movement : movements)
                        for (auto interaction : interactions)
                            for (auto risk : risks)
                                for (bool collects : bools(Field::collects_resident_data))
                                    for (bool transmits : bools(Field::transmits_harmful))
                                        for (bool agreement : bools(Field::agreement_violated)) {
                                            DeviceInstance d;
                                            d.device_title = title;
                                            d.deploy_neighborhoods = pick(neighborhoods, deploy);
                                            d.movement_type = movement;
                                            d.interaction_type = interaction;
                                            d.risk_type = risk;
                                            d.collects_resident_data = collects;
                                            d.transmits_harmful = transmits;
                                            d.agreement_violated = agreement;
                                            devices_.push_back(std::move(d));
                                        }
        }
        {  // residents: living, favored, econ, professions, preferences, authority
            const auto livings = maybe_pin(nb_subsets, needs_.reads(Field::living_neighborhoods));
            const auto econs = maybe_pin(econ_subsets, needs_.reads(Field::economic_status));
            const auto profs = maybe_pin(pair_subsets, needs_.reads(Field::professions));
            const auto prefs = maybe_pin(pair_subsets, needs_.reads(Field::iot_usage_preferences));
            const auto auths = maybe_pin(std::vector<bool>{false, true},
                                         needs_.reads(Field::has_legitimate_authority));
            const std::vector<EconomicStatus> econ_values = {
                EconomicStatus::low, EconomicStatus::middle, EconomicStatus::high};
            for (const auto& living : livings) {
                const auto favoreds =
                    maybe_pin(subset_lists(living.size(), living.size(), true),
                              needs_.reads(Field::favored_neighborhoods));
                for (const auto& favored : favoreds)
                    for (const auto& econ : econs)
                        for (const auto& prof : profs)
                            for (const auto& pref : prefs)
                                for (bool authority : auths) {
                                    ResidentGroup r;
                                    r.living_neighborhoods = pick(neighborhoods, living);
                                    r.favored_neighborhoods =
                                        pick(r.living_neighborhoods, favored);
                                    r.economic_status = pick(econ_values, econ);
                                    r.professions = pick(text_alphabet(), prof);
                                    r.iot_usage_preferences = pick(text_alphabet(), pref);
                                    r.has_legitimate_authority = authority;
                                    residents_.push_back(std::move(r));
                                }
            }
        }
        {  // governments: gov_type, goals, oversight, enforce
            const auto types = maybe_pin(text_alphabet(), needs_.reads(Field::gov_type));
            const auto goals = maybe_pin(pair_subsets, needs_.reads(Field::project_goals));
            const auto oversights = maybe_pin(std::vector<bool>{false, true},
                                              needs_.reads(Field::oversight_iot_safety));
            const auto enforces = maybe_pin(std::vector<bool>{false, true},
                                            needs_.reads(Field::enforce_safety_standards));
            for (const auto& type : types)
                for (const auto& goal : goals)
                    for (bool oversight : oversights)
                        for (bool enforce : enforces) {
                            GovernmentInstance g;
                            g.gov_type = type;
                            g.project_goals = pick(goal_alphabet(), goal);
                            g.oversight_iot_safety = oversight;
                            g.enforce_safety_standards = enforce;
                            governments_.push_back(std::move(g));
                        }
        }
        {  // businesses: scale, neighborhoods, types
            const auto scales = maybe_pin(
                std::vector<BusinessScale>{BusinessScale::small, BusinessScale::med,
                                           BusinessScale::large},
                needs_.reads(Field::scale));
            const auto nbs = maybe_pin(nb_subsets, needs_.reads(Field::neighborhoods));
            const auto types = maybe_pin(pair_subsets, needs_.reads(Field::business_types));
            for (auto scale : scales)
                for (const auto& nb : nbs)
                    for (const auto& type : types) {
                        BusinessInstance b;
                        b.scale = scale;
                        b.neighborhoods = pick(neighborhoods, nb);
                        b.business_types = pick(text_alphabet(), type);
                        businesses_.push_back(std::move(b));
                    }
        }
    }

    template <int Kind>
    bool assign_kind(std::size_t slot, std::size_t min_index) {
        if constexpr (Kind == 4) {
            (void)slot;
            (void)min_index;
            return flows_phase();
        } else {
            const auto& table = table_for<Kind>();
            if (slot == counts_[Kind]) return assign_kind<Kind + 1>(0, 0);
            for (std::size_t i = min_index; i < table.size(); ++i) {
                place<Kind>(slot, table[i]);
                if (assign_kind<Kind>(slot + 1, i)) return true;
            }
            return false;
        }
    }

    template <int Kind>
    const auto& table_for() const {
        if constexpr (Kind == 0) return devices_;
        else if constexpr (Kind == 1) return residents_;
        else if constexpr (Kind == 2) return governments_;
        else return businesses_;
    }

    template <int Kind, typename Entity>
    void place(std::size_t slot, const Entity& value) {
        if constexpr (Kind == 0) {
            model_.devices[slot] = value;
            model_.devices[slot].name = "d" + std::to_string(slot);
        } else if constexpr (Kind == 1) {
            model_.resident_groups[slot] = value;
            model_.resident_groups[slot].name = "r" + std::to_string(slot);
        } else if constexpr (Kind == 2) {
            model_.governments[slot] = value;
            model_.governments[slot].name = "g" + std::to_string(slot);
        } else {
            model_.businesses[slot] = value;
            model_.businesses[slot].name = "b" + std::to_string(slot);
        }
    }

    bool flows_phase() {
        build_flow_space();
        model_.flows.clear();
        return flow_dfs(0);
    }

    bool flow_dfs(std::size_t start) {
        if (test_candidate()) return true;
        if (model_.flows.size() >= scope_.max_flows) return false;
        for (std::size_t i = start; i < flow_space_.size(); ++i) {
            model_.flows.push_back(flow_space_[i]);
            if (flow_dfs(i + 1)) return true;
            model_.flows.pop_back();
        }
        return false;
    }

    void build_flow_space() {
        flow_space_.clear();
        if (!needs_.uses_flows) return;
        std::vector<EntityRef> endpoints;
        if (counts_[0] > 0) endpoints.push_back({EntityKind::device, "d0"});
        if (counts_[1] > 0) endpoints.push_back({EntityKind::residents, "r0"});
        if (counts_[2] > 0) endpoints.push_back({EntityKind::government, "g0"});
        if (counts_[3] > 0) endpoints.push_back({EntityKind::business, "b0"});
        endpoints.push_back({EntityKind::external, "external"});

        static constexpr std::array<PayloadKind, 7> kPayloadOrder = {
            PayloadKind::resident_personal_data, PayloadKind::resident_location,
            PayloadKind::arrival_time,           PayloadKind::economic_status,
            PayloadKind::project_goals,          PayloadKind::generic_message,
            PayloadKind::harmful_content,
        };
        const std::array<Consent, 2> consents = {Consent::granted, Consent::denied};
        const std::size_t consent_options = needs_.consent_matters ? 2 : 1;

        for (const EntityRef& src : endpoints) {
            for (const EntityRef& dst : endpoints) {
                for (PayloadKind payload : kPayloadOrder) {
                    if (!needs_.payloads.count(payload)) continue;
                    if (src == dst && payload != PayloadKind::generic_message) continue;
                    if (src.kind == EntityKind::external &&
                        payload == PayloadKind::project_goals)
                        continue;
                    for (std::size_t c = 0; c < consent_options; ++c) {
                        if (!flow_observable(src.kind, dst.kind, payload, consents[c])) continue;
                        DataFlow flow;
                        flow.source = src;
                        flow.dest = dst;
                        flow.payload = payload;
                        flow.consent = consents[c];
                        flow.provenance = FlowProvenance::scenario;
                        flow_space_.push_back(std::move(flow));
                    }
                }
            }
        }
    }

    // A flow nobody's pattern could ever match cannot change any verdict.
    bool flow_observable(EntityKind src, EntityKind dst, PayloadKind payload,
                         Consent consent) const {
        for (const FlowAtom& atom : needs_.flow_atoms) {
            if (atom.payload != payload) continue;
            if (atom.source && *atom.source != src) continue;
            if (atom.dest && *atom.dest != dst) continue;
            if (atom.consent == ConsentPattern::granted && consent != Consent::granted) continue;
            if (atom.consent == ConsentPattern::denied && consent != Consent::denied) continue;
            return true;
        }
        return false;
    }

    bool test_candidate() {
        if (examined_ >= scope_.candidate_budget) {
            exhausted_ = true;
            return true;
        }
        ++examined_;
        if (eval_expr(rule_.expr, model_) == TruthValue::False) {
            found_ = model_;
            return true;
        }
        return false;
    }
};

}  // namespace

CheckResult find_counterexample(const RuleDef& rule, const Scope& scope) {
    return Searcher(rule, scope).run();
}

// ── Witness minimization ──────────────────────────────────────────────────

namespace {

bool still_violating(const CityModel& model, const RuleDef& rule) {
    if (!validate_model(model).empty()) return false;
    CityModel closed = model;
    closed.flows_complete = true;
    return eval_expr(rule.expr, closed) == TruthValue::False;
}

template <typename Entity>
bool try_remove_entities(std::vector<Entity> CityModel::*member, CityModel& model,
                         const RuleDef& rule) {
    bool changed = false;
    auto& list = model.*member;
    for (std::size_t i = list.size(); i-- > 0;) {
        CityModel candidate = model;
        auto& clist = candidate.*member;
        clist.erase(clist.begin() + static_cast<std::ptrdiff_t>(i));
        if (still_violating(candidate, rule)) {
            model = std::move(candidate);
            changed = true;
        }
    }
    return changed;
}

template <typename Elem>
bool try_shrink_set(std::vector<Elem>& set, CityModel& model, const RuleDef& rule) {
    bool changed = false;
    for (std::size_t i = set.size(); i-- > 0;) {
        Elem removed = set[i];
        set.erase(set.begin() + static_cast<std::ptrdiff_t>(i));
        if (still_violating(model, rule)) {
            changed = true;
        } else {
            set.insert(set.begin() + static_cast<std::ptrdiff_t>(i), std::move(removed));
        }
    }
    return changed;
}

}  // namespace

CityModel minimize_witness(const CityModel& input, const RuleDef& rule) {
    {
        CityModel closed = input;
        closed.flows_complete = true;
        if (eval_expr(rule.expr, closed) != TruthValue::False) {
            throw std::invalid_argument(
                "minimize_witness requires a model the rule is violated on under the closed "
                "world");
        }
    }
    CityModel model = input;
    bool changed = true;
    while (changed) {
        changed = false;
        changed |= try_remove_entities(&CityModel::businesses, model, rule);
        changed |= try_remove_entities(&CityModel::governments, model, rule);
        changed |= try_remove_entities(&CityModel::resident_groups, model, rule);
        changed |= try_remove_entities(&CityModel::devices, model, rule);
        {
            auto& flows = model.flows;
            for (std::size_t i = flows.size(); i-- > 0;) {
                CityModel candidate = model;
                candidate.flows.erase(candidate.flows.begin() + static_cast<std::ptrdiff_t>(i));
                if (still_violating(candidate, rule)) {
                    model = std::move(candidate);
                    changed = true;
                }
            }
        }
        for (auto it = model.businesses.rbegin(); it != model.businesses.rend(); ++it) {
            changed |= try_shrink_set(it->business_types, model, rule);
            changed |= try_shrink_set(it->neighborhoods, model, rule);
        }
        for (auto it = model.governments.rbegin(); it != model.governments.rend(); ++it) {
            changed |= try_shrink_set(it->project_goals, model, rule);
        }
        for (auto it = model.resident_groups.rbegin(); it != model.resident_groups.rend(); ++it) {
            changed |= try_shrink_set(it->iot_usage_preferences, model, rule);
            changed |= try_shrink_set(it->professions, model, rule);
            changed |= try_shrink_set(it->economic_status, model, rule);
            changed |= try_shrink_set(it->favored_neighborhoods, model, rule);
            changed |= try_shrink_set(it->living_neighborhoods, model, rule);
        }
        for (auto it = model.devices.rbegin(); it != model.devices.rend(); ++it) {
            changed |= try_shrink_set(it->deploy_neighborhoods, model, rule);
        }
    }
    return model;
}

}  // namespace civitas
