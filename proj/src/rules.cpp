#include "civitas/rules.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include "lexer.hpp"

namespace civitas {

std::string_view to_string(TruthValue v) {
    switch (v) {
        case TruthValue::False: return "false";
        case TruthValue::Unknown: return "unknown";
        case TruthValue::True: return "true";
    }
    return "?";
}

std::string_view to_string(CompareOp op) {
    switch (op) {
        case CompareOp::eq: return "=";
        case CompareOp::ne: return "!=";
        case CompareOp::ge: return ">=";
        case CompareOp::le: return "<=";
        case CompareOp::gt: return ">";
        case CompareOp::lt: return "<";
    }
    return "?";
}

std::string_view to_string(Right r) {
    switch (r) {
        case Right::safety: return "safety";
        case Right::privacy: return "privacy";
        case Right::fairness: return "fairness";
        case Right::truth: return "truth";
        case Right::what_is_agreed: return "what_is_agreed";
        case Right::authority: return "authority";
    }
    return "?";
}

std::optional<Right> parse_right(std::string_view token) {
    static constexpr std::array<Right, 6> kAll = {Right::safety,  Right::privacy,
                                                  Right::fairness, Right::truth,
                                                  Right::what_is_agreed, Right::authority};
    for (Right r : kAll)
        if (token_eq(token, to_string(r))) return r;
    return std::nullopt;
}

std::string_view to_string(Verdict::Kind k) {
    switch (k) {
        case Verdict::Kind::compliant: return "compliant";
        case Verdict::Kind::violated: return "violated";
        case Verdict::Kind::indeterminate: return "indeterminate";
    }
    return "?";
}

// ── Field table ───────────────────────────────────────────────────────────

namespace {

constexpr SetElemType kNoElem = SetElemType::text;

constexpr FieldInfo kFields[] = {
    {Field::device_title, EntityKind::device, "device_title", false, ScalarType::text, kNoElem},
    {Field::deploy_neighborhoods, EntityKind::device, "deploy_neighborhoods", true,
     ScalarType::text, SetElemType::neighborhood},
    {Field::movement_type, EntityKind::device, "movement_type", false, ScalarType::movement,
     kNoElem},
    {Field::interaction_type, EntityKind::device, "interaction_type", false,
     ScalarType::interaction, kNoElem},
    {Field::risk_type, EntityKind::device, "risk_type", false, ScalarType::risk, kNoElem},
    {Field::transmits_harmful, EntityKind::device, "transmits_harmful", false,
     ScalarType::boolean, kNoElem},
    {Field::collects_resident_data, EntityKind::device, "collects_resident_data", false,
     ScalarType::boolean, kNoElem},
    {Field::agreement_violated, EntityKind::device, "agreement_violated", false,
     ScalarType::boolean, kNoElem},
    {Field::living_neighborhoods, EntityKind::residents, "living_neighborhoods", true,
     ScalarType::text, SetElemType::neighborhood},
    {Field::favored_neighborhoods, EntityKind::residents, "favored_neighborhoods", true,
     ScalarType::text, SetElemType::neighborhood},
    {Field::economic_status, EntityKind::residents, "economic_status", true, ScalarType::text,
     SetElemType::econ},
    {Field::professions, EntityKind::residents, "professions", true, ScalarType::text,
     SetElemType::text},
    {Field::iot_usage_preferences, EntityKind::residents, "iot_usage_preferences", true,
     ScalarType::text, SetElemType::text},
    {Field::has_legitimate_authority, EntityKind::residents, "has_legitimate_authority", false,
     ScalarType::boolean, kNoElem},
    {Field::gov_type, EntityKind::government, "gov_type", false, ScalarType::text, kNoElem},
    {Field::project_goals, EntityKind::government, "project_goals", true, ScalarType::text,
     SetElemType::text},
    {Field::oversight_iot_safety, EntityKind::government, "oversight_iot_safety", false,
     ScalarType::boolean, kNoElem},
    {Field::enforce_safety_standards, EntityKind::government, "enforce_safety_standards", false,
     ScalarType::boolean, kNoElem},
    {Field::scale, EntityKind::business, "scale", false, ScalarType::scale, kNoElem},
    {Field::neighborhoods, EntityKind::business, "neighborhoods", true, ScalarType::text,
     SetElemType::neighborhood},
    {Field::business_types, EntityKind::business, "business_types", true, ScalarType::text,
     SetElemType::text},
};

std::string_view enum_family_name(ScalarType t) {
    switch (t) {
        case ScalarType::movement: return "movement";
        case ScalarType::interaction: return "interaction";
        case ScalarType::risk: return "risk";
        case ScalarType::econ: return "economic_status";
        case ScalarType::scale: return "scale";
        default: return {};
    }
}

std::string_view family_name(SetElemType t) {
    return t == SetElemType::econ ? "economic_status" : std::string_view{};
}

// Canonicalizes an enum token, returning nullopt for unknown values.
std::optional<std::string> canonical_enum_token(ScalarType family, std::string_view token) {
    switch (family) {
        case ScalarType::movement:
            if (auto v = parse_movement(token)) return std::string(to_string(*v));
            return std::nullopt;
        case ScalarType::interaction:
            if (auto v = parse_interaction(token)) return std::string(to_string(*v));
            return std::nullopt;
        case ScalarType::risk:
            if (auto v = parse_risk(token)) return std::string(to_string(*v));
            return std::nullopt;
        case ScalarType::econ:
            if (auto v = parse_economic_status(token)) return std::string(to_string(*v));
            return std::nullopt;
        case ScalarType::scale:
            if (auto v = parse_scale(token)) return std::string(to_string(*v));
            return std::nullopt;
        default: return std::string(token);
    }
}

}  // namespace

const FieldInfo& field_info(Field f) {
    for (const FieldInfo& info : kFields)
        if (info.id == f) return info;
    return kFields[0];
}

const FieldInfo* find_field(EntityKind kind, std::string_view name) {
    for (const FieldInfo& info : kFields)
        if (info.kind == kind && token_eq(info.name, name)) return &info;
    return nullptr;
}

std::vector<std::string> field_names(EntityKind kind) {
    std::vector<std::string> out;
    for (const FieldInfo& info : kFields)
        if (info.kind == kind) out.emplace_back(info.name);
    return out;
}

// ── Printing ──────────────────────────────────────────────────────────────

namespace {

std::string print_term(const Term& term) {
    if (const auto* f = std::get_if<FieldRef>(&term)) {
        return f->var + "." + std::string(field_info(f->field).name);
    }
    if (const auto* lit = std::get_if<Literal>(&term)) {
        if (lit->type == ScalarType::boolean) return lit->bool_value ? "true" : "false";
        if (lit->type == ScalarType::count) return std::to_string(lit->count_value);
        return render_token(lit->token);
    }
    const auto& card = std::get<CardTerm>(term);
    std::string inner = card.universe
                            ? "universe"
                            : card.set->var + "." + std::string(field_info(card.set->field).name);
    std::string out = "card(" + inner + ")";
    if (card.scale != 1) out = std::to_string(card.scale) + " * " + out;
    return out;
}

std::string kind_pattern(const std::optional<EntityKind>& k) {
    return k ? std::string(to_string(*k)) : "*";
}

}  // namespace

std::string describe_flow_pattern(const FlowAtom& f) {
    std::string out = "flow(" + kind_pattern(f.source) + " -> " + kind_pattern(f.dest) + " : " +
                      std::string(to_string(f.payload));
    if (f.consent != ConsentPattern::any) {
        out += ", consent=";
        out += f.consent == ConsentPattern::granted ? "granted" : "denied";
    }
    out += ")";
    return out;
}

std::string print_expr(const ExprPtr& e) {
    struct Printer {
        std::string operator()(const Quantified& q) const {
            return std::string(q.is_forall ? "forall " : "exists ") + q.var + " in " +
                   domain_name(q.domain) + ": " + print_expr(q.body);
        }
        std::string operator()(const Connective& c) const {
            std::string out;
            for (std::size_t i = 0; i < c.operands.size(); ++i) {
                if (i) out += c.is_and ? " and " : " or ";
                out += wrap(c.operands[i]);
            }
            return out;
        }
        std::string operator()(const Negation& n) const { return "not " + wrap(n.operand); }
        std::string operator()(const CompareExpr& c) const {
            return print_term(c.lhs) + " " + std::string(to_string(c.op)) + " " +
                   print_term(c.rhs);
        }
        std::string operator()(const MemberExpr& m) const {
            std::string set;
            if (m.set_field) {
                set = m.set_field->var + "." + std::string(field_info(m.set_field->field).name);
            } else {
                set = "{";
                for (std::size_t i = 0; i < m.set_literal.size(); ++i) {
                    if (i) set += ", ";
                    set += render_token(m.set_literal[i]);
                }
                set += "}";
            }
            return print_term(m.element) + " in " + set;
        }
        std::string operator()(const FlowAtom& f) const { return describe_flow_pattern(f); }
        std::string operator()(const BoolField& b) const {
            return b.ref.var + "." + std::string(field_info(b.ref.field).name);
        }
        std::string operator()(const BoolConst& b) const { return b.value ? "true" : "false"; }

        static std::string domain_name(EntityKind k) {
            switch (k) {
                case EntityKind::device: return "devices";
                case EntityKind::residents: return "resident_groups";
                case EntityKind::government: return "governments";
                case EntityKind::business: return "businesses";
                case EntityKind::external: return "external";
            }
            return "?";
        }
        static std::string wrap(const ExprPtr& child) {
            const bool atom = std::holds_alternative<CompareExpr>(child->node) ||
                              std::holds_alternative<MemberExpr>(child->node) ||
                              std::holds_alternative<FlowAtom>(child->node) ||
                              std::holds_alternative<BoolField>(child->node) ||
                              std::holds_alternative<BoolConst>(child->node) ||
                              std::holds_alternative<Negation>(child->node);
            return atom ? print_expr(child) : "(" + print_expr(child) + ")";
        }
    };
    return std::visit(Printer{}, e->node);
}

// ── Structural equality ───────────────────────────────────────────────────

namespace {

bool term_equal(const Term& a, const Term& b) {
    if (a.index() != b.index()) return false;
    if (const auto* fa = std::get_if<FieldRef>(&a)) {
        const auto& fb = std::get<FieldRef>(b);
        return fa->var == fb.var && fa->field == fb.field;
    }
    if (const auto* la = std::get_if<Literal>(&a)) {
        const auto& lb = std::get<Literal>(b);
        if (la->type != lb.type) return false;
        if (la->type == ScalarType::boolean) return la->bool_value == lb.bool_value;
        if (la->type == ScalarType::count) return la->count_value == lb.count_value;
        return token_eq(la->token, lb.token);
    }
    const auto& ca = std::get<CardTerm>(a);
    const auto& cb = std::get<CardTerm>(b);
    if (ca.scale != cb.scale || ca.universe != cb.universe) return false;
    if (ca.universe) return true;
    return ca.set->var == cb.set->var && ca.set->field == cb.set->field;
}

}  // namespace

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return a == b;
    if (a->node.index() != b->node.index()) return false;
    if (const auto* qa = std::get_if<Quantified>(&a->node)) {
        const auto& qb = std::get<Quantified>(b->node);
        return qa->is_forall == qb.is_forall && qa->var == qb.var && qa->domain == qb.domain &&
               expr_equal(qa->body, qb.body);
    }
    if (const auto* ca = std::get_if<Connective>(&a->node)) {
        const auto& cb = std::get<Connective>(b->node);
        if (ca->is_and != cb.is_and || ca->operands.size() != cb.operands.size()) return false;
        for (std::size_t i = 0; i < ca->operands.size(); ++i)
            if (!expr_equal(ca->operands[i], cb.operands[i])) return false;
        return true;
    }
    if (const auto* na = std::get_if<Negation>(&a->node)) {
        return expr_equal(na->operand, std::get<Negation>(b->node).operand);
    }
    if (const auto* pa = std::get_if<CompareExpr>(&a->node)) {
        const auto& pb = std::get<CompareExpr>(b->node);
        return pa->op == pb.op && term_equal(pa->lhs, pb.lhs) && term_equal(pa->rhs, pb.rhs);
    }
    if (const auto* ma = std::get_if<MemberExpr>(&a->node)) {
        const auto& mb = std::get<MemberExpr>(b->node);
        if (!term_equal(ma->element, mb.element)) return false;
        if (ma->set_field.has_value() != mb.set_field.has_value()) return false;
        if (ma->set_field) {
            return ma->set_field->var == mb.set_field->var &&
                   ma->set_field->field == mb.set_field->field;
        }
        if (ma->set_literal.size() != mb.set_literal.size()) return false;
        for (std::size_t i = 0; i < ma->set_literal.size(); ++i)
            if (!token_eq(ma->set_literal[i], mb.set_literal[i])) return false;
        return true;
    }
    if (const auto* fa = std::get_if<FlowAtom>(&a->node)) {
        const auto& fb = std::get<FlowAtom>(b->node);
        return fa->source == fb.source && fa->dest == fb.dest && fa->payload == fb.payload &&
               fa->consent == fb.consent;
    }
    if (const auto* ba = std::get_if<BoolField>(&a->node)) {
        const auto& bb = std::get<BoolField>(b->node);
        return ba->ref.var == bb.ref.var && ba->ref.field == bb.ref.field;
    }
    return std::get<BoolConst>(a->node).value == std::get<BoolConst>(b->node).value;
}

bool rule_equal(const RuleDef& a, const RuleDef& b) {
    return a.id == b.id && a.right == b.right && token_eq(a.perspective.first, b.perspective.first) &&
           token_eq(a.perspective.second, b.perspective.second) && a.statement == b.statement &&
           expr_equal(a.expr, b.expr);
}

// ── Parser ────────────────────────────────────────────────────────────────

namespace {

using detail::Lexer;
using detail::Token;

class RuleParser {
public:
    explicit RuleParser(std::string_view text) : lex_(text) {}

    RuleDef parse_one() {
        RuleDef rule = parse_header();
        rule.expr = parse_expr();
        if (!lex_.at_end()) {
            throw ParseError(lex_.peek().span,
                             "unexpected " + detail::token_desc(lex_.peek()) + " after rule body");
        }
        return rule;
    }

    std::vector<RuleDef> parse_all() {
        std::vector<RuleDef> rules;
        if (lex_.at_end()) throw ParseError(lex_.peek().span, "no rule definitions");
        while (!lex_.at_end()) {
            RuleDef rule = parse_header();
            rule.expr = parse_expr_until_rule();
            for (const auto& prev : rules) {
                if (token_eq(prev.id, rule.id)) {
                    throw ParseError(lex_.peek().span, "duplicate rule id '" + rule.id + "'");
                }
            }
            rules.push_back(std::move(rule));
        }
        return rules;
    }

private:
    Lexer lex_;
    std::vector<std::pair<std::string, EntityKind>> scope_;
    bool stop_at_rule_ = false;

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(lex_.peek().span, msg); }

    Token expect_ident(std::string_view what) {
        if (!lex_.peek().is_ident()) fail("expected " + std::string(what));
        return lex_.next();
    }

    void expect_punct(std::string_view p) {
        if (!lex_.peek().is_punct(p)) {
            fail("expected '" + std::string(p) + "' but found " + detail::token_desc(lex_.peek()));
        }
        lex_.next();
    }

    bool accept_ident(std::string_view word) {
        if (lex_.peek().is_ident() && token_eq(lex_.peek().text, word)) {
            lex_.next();
            return true;
        }
        return false;
    }

    RuleDef parse_header() {
        if (!accept_ident("rule")) fail("expected 'rule'");
        RuleDef rule;
        rule.id = expect_ident("rule id").text;
        bool have_right = false, have_perspective = false;
        while (true) {
            if (lex_.peek().is_ident() && token_eq(lex_.peek().text, "right")) {
                lex_.next();
                expect_punct("=");
                Token t = expect_ident("a right");
                auto r = parse_right(t.text);
                if (!r) {
                    throw ParseError(t.span, "unknown right '" + t.text +
                                                 "' (expected safety, privacy, fairness, truth, "
                                                 "what_is_agreed or authority)");
                }
                rule.right = *r;
                have_right = true;
            } else if (lex_.peek().is_ident() && token_eq(lex_.peek().text, "perspective")) {
                lex_.next();
                expect_punct("=");
                Token t = expect_ident("a perspective pair");
                const std::size_t dash = t.text.find('-');
                if (dash == std::string::npos || dash == 0 || dash + 1 == t.text.size()) {
                    throw ParseError(t.span, "perspective must look like residents-government");
                }
                rule.perspective = {t.text.substr(0, dash), t.text.substr(dash + 1)};
                have_perspective = true;
            } else if (lex_.peek().is_ident() && token_eq(lex_.peek().text, "statement")) {
                lex_.next();
                expect_punct("=");
                if (lex_.peek().type != Token::Type::string) fail("statement expects a string");
                rule.statement = lex_.next().text;
            } else {
                break;
            }
        }
        if (!have_right) fail("rule is missing right=<right>");
        if (!have_perspective) fail("rule is missing perspective=<a>-<b>");
        expect_punct(":");
        return rule;
    }

    ExprPtr parse_expr_until_rule() {
        stop_at_rule_ = true;
        ExprPtr e = parse_expr();
        stop_at_rule_ = false;
        return e;
    }

    bool at_expr_end() const {
        if (lex_.at_end()) return true;
        return stop_at_rule_ && lex_.peek().is_ident() && token_eq(lex_.peek().text, "rule");
    }

    bool exists_is_flow_atom() const {
        return lex_.peek(1).is_ident() && token_eq(lex_.peek(1).text, "flow") &&
               lex_.peek(2).is_punct("(");
    }

    ExprPtr parse_expr() {
        if (lex_.peek().is_ident() &&
            (token_eq(lex_.peek().text, "forall") ||
             (token_eq(lex_.peek().text, "exists") && !exists_is_flow_atom()))) {
            return parse_quantifier();
        }
        return parse_implies();
    }

    ExprPtr parse_quantifier() {
        const bool is_forall = token_eq(lex_.peek().text, "forall");
        lex_.next();
        std::vector<std::pair<std::string, EntityKind>> bindings;
        while (true) {
            Token var = expect_ident("a variable name");
            for (const auto& [name, kind] : scope_) {
                if (name == var.text)
                    throw ParseError(var.span, "variable '" + var.text + "' is already bound");
            }
            if (!accept_ident("in")) fail("expected 'in' after variable");
            Token dom = expect_ident("a domain (devices, resident_groups, governments, businesses)");
            auto kind = parse_entity_kind(dom.text);
            if (!kind || *kind == EntityKind::external) {
                throw ParseError(dom.span,
                                 "unknown domain '" + dom.text +
                                     "' (expected devices, resident_groups/residents, "
                                     "governments or businesses)");
            }
            bindings.emplace_back(var.text, *kind);
            if (lex_.peek().is_punct(",")) {
                lex_.next();
                continue;
            }
            break;
        }
        expect_punct(":");
        for (const auto& b : bindings) scope_.push_back(b);
        ExprPtr body = parse_expr();
        for (std::size_t i = 0; i < bindings.size(); ++i) scope_.pop_back();
        for (auto it = bindings.rbegin(); it != bindings.rend(); ++it) {
            body = make_expr(Quantified{is_forall, it->first, it->second, std::move(body)});
        }
        return body;
    }

    ExprPtr parse_implies() {
        ExprPtr lhs = parse_or();
        if (lex_.peek().is_ident() && token_eq(lex_.peek().text, "implies")) {
            lex_.next();
            ExprPtr rhs = parse_expr();
            // a implies b is sugar for (not a) or b
            Connective c{false, {}};
            c.operands.push_back(make_expr(Negation{std::move(lhs)}));
            c.operands.push_back(std::move(rhs));
            return make_expr(std::move(c));
        }
        return lhs;
    }

    ExprPtr parse_or() {
        ExprPtr first = parse_and();
        if (!(lex_.peek().is_ident() && token_eq(lex_.peek().text, "or"))) return first;
        Connective c{false, {}};
        c.operands.push_back(std::move(first));
        while (lex_.peek().is_ident() && token_eq(lex_.peek().text, "or")) {
            lex_.next();
            c.operands.push_back(parse_and());
        }
        return make_expr(std::move(c));
    }

    ExprPtr parse_and() {
        ExprPtr first = parse_not();
        if (!(lex_.peek().is_ident() && token_eq(lex_.peek().text, "and"))) return first;
        Connective c{true, {}};
        c.operands.push_back(std::move(first));
        while (lex_.peek().is_ident() && token_eq(lex_.peek().text, "and")) {
            lex_.next();
            c.operands.push_back(parse_not());
        }
        return make_expr(std::move(c));
    }

    ExprPtr parse_not() {
        if (lex_.peek().is_ident() && token_eq(lex_.peek().text, "not")) {
            lex_.next();
            return make_expr(Negation{parse_not()});
        }
        // A quantifier may sit under a negation; its body runs to the end of
        // the enclosing expression.
        if (lex_.peek().is_ident() &&
            (token_eq(lex_.peek().text, "forall") ||
             (token_eq(lex_.peek().text, "exists") && !exists_is_flow_atom()))) {
            return parse_quantifier();
        }
        return parse_atom();
    }

    ExprPtr parse_atom() {
        const Token& t = lex_.peek();
        if (t.is_punct("(")) {
            lex_.next();
            ExprPtr inner = parse_expr();
            expect_punct(")");
            return inner;
        }
        if (t.is_ident() && token_eq(t.text, "exists") && exists_is_flow_atom()) {
            lex_.next();  // 'exists' is optional sugar before a flow atom
            return parse_flow_atom();
        }
        if (t.is_ident() && token_eq(t.text, "flow") && lex_.peek(1).is_punct("(")) {
            return parse_flow_atom();
        }
        if (t.is_ident() && token_eq(t.text, "true") ) {
            lex_.next();
            return make_expr(BoolConst{true});
        }
        if (t.is_ident() && token_eq(t.text, "false")) {
            lex_.next();
            return make_expr(BoolConst{false});
        }
        return parse_term_led();
    }

    ExprPtr parse_flow_atom() {
        lex_.next();  // 'flow'
        expect_punct("(");
        FlowAtom atom;
        atom.source = parse_kind_pattern();
        expect_punct("->");
        atom.dest = parse_kind_pattern();
        expect_punct(":");
        Token p = expect_ident("a payload kind");
        auto payload = parse_payload(p.text);
        if (!payload) {
            throw ParseError(p.span, "unknown payload '" + p.text + "' (expected " +
                                         join(enum_values("payload")) + ")");
        }
        atom.payload = *payload;
        if (lex_.peek().is_punct(",")) {
            lex_.next();
            if (!accept_ident("consent")) fail("expected 'consent='");
            expect_punct("=");
            if (lex_.peek().is_punct("*")) {
                lex_.next();
                atom.consent = ConsentPattern::any;
            } else {
                Token c = expect_ident("granted, denied or *");
                if (token_eq(c.text, "granted"))
                    atom.consent = ConsentPattern::granted;
                else if (token_eq(c.text, "denied"))
                    atom.consent = ConsentPattern::denied;
                else
                    throw ParseError(c.span, "consent pattern must be granted, denied or *");
            }
        }
        expect_punct(")");
        return make_expr(std::move(atom));
    }

    std::optional<EntityKind> parse_kind_pattern() {
        if (lex_.peek().is_punct("*")) {
            lex_.next();
            return std::nullopt;
        }
        Token t = expect_ident("an entity kind or *");
        auto kind = parse_entity_kind(t.text);
        if (!kind) {
            throw ParseError(t.span, "unknown entity kind '" + t.text +
                                         "' (expected device, residents, government, business, "
                                         "external or *)");
        }
        return kind;
    }

    // A term followed by a comparison, 'in', or standing alone as a boolean.
    ExprPtr parse_term_led() {
        const SourceSpan start = lex_.peek().span;
        Term lhs = parse_term();
        const Token& op = lex_.peek();
        if (op.is_punct("=") || op.is_punct("!=") || op.is_punct(">=") || op.is_punct("<=") ||
            op.is_punct(">") || op.is_punct("<")) {
            CompareOp cop = op.text == "=" ? CompareOp::eq
                            : op.text == "!=" ? CompareOp::ne
                            : op.text == ">=" ? CompareOp::ge
                            : op.text == "<=" ? CompareOp::le
                            : op.text == ">" ? CompareOp::gt
                                             : CompareOp::lt;
            lex_.next();
            Term rhs = parse_term();
            return typecheck_compare(cop, std::move(lhs), std::move(rhs), start);
        }
        if (op.is_ident() && token_eq(op.text, "in")) {
            lex_.next();
            return parse_member(std::move(lhs), start);
        }
        // bare boolean field
        if (const auto* f = std::get_if<FieldRef>(&lhs)) {
            const FieldInfo& info = field_info(f->field);
            if (!info.is_set && info.scalar == ScalarType::boolean) {
                return make_expr(BoolField{*f});
            }
            throw ParseError(start, "field '" + std::string(info.name) +
                                        "' is not boolean; expected a comparison");
        }
        throw ParseError(start, "expected a comparison, 'in', or a boolean field");
    }

    Term parse_term() {
        const Token& t = lex_.peek();
        if (t.type == Token::Type::integer) {
            lex_.next();
            if (lex_.peek().is_punct("*")) {
                lex_.next();
                CardTerm card = parse_card();
                card.scale = t.int_value;
                return card;
            }
            Literal lit;
            lit.type = ScalarType::count;
            lit.count_value = t.int_value;
            return lit;
        }
        if (t.is_ident() && token_eq(t.text, "card") && lex_.peek(1).is_punct("(")) {
            return parse_card();
        }
        if (t.type == Token::Type::string) {
            lex_.next();
            Literal lit;
            lit.type = ScalarType::text;
            lit.token = t.text;
            return lit;
        }
        if (t.is_ident()) {
            if (token_eq(t.text, "true") || token_eq(t.text, "false")) {
                lex_.next();
                Literal lit;
                lit.type = ScalarType::boolean;
                lit.bool_value = token_eq(t.text, "true");
                return lit;
            }
            if (lex_.peek(1).is_punct(".")) {
                return parse_field_ref();
            }
            lex_.next();
            Literal lit;
            lit.type = ScalarType::text;  // refined when unified against a field
            lit.token = t.text;
            return lit;
        }
        fail("expected a value, field access, or card(...)");
    }

    CardTerm parse_card() {
        lex_.next();  // 'card'
        expect_punct("(");
        CardTerm card;
        if (lex_.peek().is_ident() && token_eq(lex_.peek().text, "universe") &&
            !lex_.peek(1).is_punct(".")) {
            lex_.next();
            card.universe = true;
        } else {
            FieldRef ref = parse_field_ref();
            const FieldInfo& info = field_info(ref.field);
            if (!info.is_set) {
                fail("card() needs a set-valued field; '" + std::string(info.name) +
                     "' is scalar");
            }
            card.set = std::move(ref);
        }
        expect_punct(")");
        return card;
    }

    FieldRef parse_field_ref() {
        Token var = expect_ident("a variable");
        EntityKind kind = EntityKind::device;
        bool bound = false;
        for (const auto& [name, k] : scope_) {
            if (name == var.text) {
                kind = k;
                bound = true;
            }
        }
        if (!bound) {
            throw ParseError(var.span, "unknown variable '" + var.text + "'");
        }
        expect_punct(".");
        Token field = expect_ident("a field name");
        const FieldInfo* info = find_field(kind, field.text);
        if (!info) {
            std::string msg = "unknown field '" + field.text + "' on " +
                              std::string(to_string(kind)) + " (variable '" + var.text + "')";
            if (auto hint = closest_match(field.text, field_names(kind))) {
                msg += "; did you mean '" + *hint + "'?";
            }
            throw ParseError(field.span, msg);
        }
        return FieldRef{var.text, info->id};
    }

    ExprPtr typecheck_compare(CompareOp op, Term lhs, Term rhs, SourceSpan span) {
        const bool lhs_count = is_countish(lhs);
        const bool rhs_count = is_countish(rhs);
        if (lhs_count || rhs_count) {
            if (!lhs_count || !rhs_count) {
                throw ParseError(span, "cannot compare a count against a non-count value");
            }
            return make_expr(CompareExpr{op, std::move(lhs), std::move(rhs)});
        }
        if (op != CompareOp::eq && op != CompareOp::ne) {
            throw ParseError(span, "ordering comparisons are only defined for counts");
        }
        unify_scalars(lhs, rhs, span);
        return make_expr(CompareExpr{op, std::move(lhs), std::move(rhs)});
    }

    static bool is_countish(const Term& t) {
        if (std::holds_alternative<CardTerm>(t)) return true;
        const auto* lit = std::get_if<Literal>(&t);
        return lit && lit->type == ScalarType::count;
    }

    ScalarType scalar_type_of(const Term& t) {
        if (const auto* f = std::get_if<FieldRef>(&t)) {
            const FieldInfo& info = field_info(f->field);
            if (info.is_set) {
                throw ParseError(lex_.peek().span,
                                 "set-valued field '" + std::string(info.name) +
                                     "' cannot be compared directly; use card() or 'in'");
            }
            return info.scalar;
        }
        return std::get<Literal>(t).type;
    }

    void coerce_literal(Literal& lit, ScalarType want, SourceSpan span) {
        if (lit.type == want) return;
        if (lit.type == ScalarType::text && want != ScalarType::boolean &&
            want != ScalarType::count) {
            auto canonical = canonical_enum_token(want, lit.token);
            if (!canonical) {
                throw ParseError(span, "unknown " + std::string(enum_family_name(want)) +
                                           " value '" + lit.token + "' (expected " +
                                           join(enum_values(enum_family_name(want))) + ")");
            }
            lit.type = want;
            lit.token = *canonical;
            return;
        }
        throw ParseError(span, "operands of a comparison must share a type");
    }

    void unify_scalars(Term& lhs, Term& rhs, SourceSpan span) {
        auto* lf = std::get_if<FieldRef>(&lhs);
        auto* rf = std::get_if<FieldRef>(&rhs);
        if (lf && rf) {
            if (scalar_type_of(lhs) != scalar_type_of(rhs)) {
                throw ParseError(span, "operands of a comparison must share a type");
            }
            return;
        }
        if (lf) {
            coerce_literal(std::get<Literal>(rhs), scalar_type_of(lhs), span);
            return;
        }
        if (rf) {
            coerce_literal(std::get<Literal>(lhs), scalar_type_of(rhs), span);
            return;
        }
        auto& ll = std::get<Literal>(lhs);
        auto& rl = std::get<Literal>(rhs);
        if (ll.type != rl.type) {
            throw ParseError(span, "operands of a comparison must share a type");
        }
        if (ll.type == ScalarType::text) {
            throw ParseError(span, "cannot infer a type for a token-to-token comparison");
        }
    }

    ExprPtr parse_member(Term element, SourceSpan span) {
        if (std::holds_alternative<CardTerm>(element)) {
            throw ParseError(span, "card(...) cannot be a member of a set");
        }
        MemberExpr member;
        member.element = std::move(element);
        if (lex_.peek().is_punct("{")) {
            lex_.next();
            std::vector<std::string> tokens;
            while (true) {
                const Token& t = lex_.peek();
                if (t.is_ident() || t.type == Token::Type::string) {
                    tokens.push_back(lex_.next().text);
                } else {
                    fail("expected a value inside {...}");
                }
                if (lex_.peek().is_punct(",")) {
                    lex_.next();
                    continue;
                }
                break;
            }
            expect_punct("}");
            member.set_literal = std::move(tokens);
            typecheck_member_literal(member, span);
        } else {
            FieldRef set = parse_field_ref();
            const FieldInfo& info = field_info(set.field);
            if (!info.is_set) {
                throw ParseError(span, "'in' needs a set-valued field on the right; '" +
                                           std::string(info.name) + "' is scalar");
            }
            typecheck_member_field(member, info, span);
            member.set_field = std::move(set);
        }
        return make_expr(std::move(member));
    }

    void typecheck_member_literal(MemberExpr& member, SourceSpan span) {
        const auto* f = std::get_if<FieldRef>(&member.element);
        if (!f) {
            throw ParseError(span, "a literal-in-literal membership has no type; use a field");
        }
        const ScalarType elem_type = scalar_type_of(member.element);
        if (elem_type == ScalarType::boolean || elem_type == ScalarType::count) {
            throw ParseError(span, "membership is not defined for booleans or counts");
        }
        for (auto& token : member.set_literal) {
            auto canonical = canonical_enum_token(elem_type, token);
            if (!canonical) {
                throw ParseError(span, "unknown " + std::string(enum_family_name(elem_type)) +
                                           " value '" + token + "' (expected " +
                                           join(enum_values(enum_family_name(elem_type))) + ")");
            }
            token = *canonical;
        }
    }

    void typecheck_member_field(MemberExpr& member, const FieldInfo& set_info, SourceSpan span) {
        if (auto* lit = std::get_if<Literal>(&member.element)) {
            if (lit->type == ScalarType::boolean || lit->type == ScalarType::count) {
                throw ParseError(span, "membership is not defined for booleans or counts");
            }
            if (auto family = family_name(set_info.elem); !family.empty()) {
                auto canonical = canonical_enum_token(ScalarType::econ, lit->token);
                if (!canonical) {
                    throw ParseError(span, "unknown " + std::string(family) + " value '" +
                                               lit->token + "' (expected " +
                                               join(enum_values(family)) + ")");
                }
                lit->token = *canonical;
            }
            return;
        }
        const ScalarType elem_type = scalar_type_of(member.element);
        const bool ok = (set_info.elem == SetElemType::text && elem_type == ScalarType::text) ||
                        (set_info.elem == SetElemType::neighborhood &&
                         elem_type == ScalarType::text);
        if (!ok) {
            throw ParseError(span, "element type does not match the set's element type");
        }
    }

    static std::string join(const std::vector<std::string>& values) {
        std::string out;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out += ", ";
            out += values[i];
        }
        return out;
    }
};

}  // namespace

RuleDef parse_rule(std::string_view text) { return RuleParser(text).parse_one(); }

std::vector<RuleDef> parse_rules(std::string_view text) { return RuleParser(text).parse_all(); }

// ── Evaluation ────────────────────────────────────────────────────────────

namespace {

struct EvalContext {
    const CityModel& model;
    mutable std::optional<std::size_t> universe_size;

    std::size_t universe() const {
        if (!universe_size) universe_size = neighborhood_universe(model).size();
        return *universe_size;
    }
};

const Binding* lookup(const Env& env, const std::string& var) {
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
        if (it->var == var) return &*it;
    }
    return nullptr;
}

struct ScalarValue {
    bool is_bool = false;
    bool b = false;
    std::string token;
};

ScalarValue scalar_field(const EvalContext& ctx, const Env& env, const FieldRef& ref) {
    const Binding* bind = lookup(env, ref.var);
    ScalarValue out;
    const CityModel& m = ctx.model;
    switch (ref.field) {
        case Field::device_title: out.token = m.devices[bind->index].device_title; break;
        case Field::movement_type:
            out.token = to_string(m.devices[bind->index].movement_type);
            break;
        case Field::interaction_type:
            out.token = to_string(m.devices[bind->index].interaction_type);
            break;
        case Field::risk_type: out.token = to_string(m.devices[bind->index].risk_type); break;
        case Field::transmits_harmful:
            out.is_bool = true;
            out.b = m.devices[bind->index].transmits_harmful;
            break;
        case Field::collects_resident_data:
            out.is_bool = true;
            out.b = m.devices[bind->index].collects_resident_data;
            break;
        case Field::agreement_violated:
            out.is_bool = true;
            out.b = m.devices[bind->index].agreement_violated;
            break;
        case Field::has_legitimate_authority:
            out.is_bool = true;
            out.b = m.resident_groups[bind->index].has_legitimate_authority;
            break;
        case Field::gov_type: out.token = m.governments[bind->index].gov_type; break;
        case Field::oversight_iot_safety:
            out.is_bool = true;
            out.b = m.governments[bind->index].oversight_iot_safety;
            break;
        case Field::enforce_safety_standards:
            out.is_bool = true;
            out.b = m.governments[bind->index].enforce_safety_standards;
            break;
        case Field::scale: out.token = to_string(m.businesses[bind->index].scale); break;
        default: break;
    }
    return out;
}

std::vector<std::string> set_field_tokens(const EvalContext& ctx, const Env& env,
                                          const FieldRef& ref) {
    const Binding* bind = lookup(env, ref.var);
    const CityModel& m = ctx.model;
    auto names = [](const std::vector<NeighborhoodId>& set) {
        std::vector<std::string> out;
        out.reserve(set.size());
        for (const auto& n : set) out.push_back(n.name);
        return out;
    };
    switch (ref.field) {
        case Field::deploy_neighborhoods:
            return names(m.devices[bind->index].deploy_neighborhoods);
        case Field::living_neighborhoods:
            return names(m.resident_groups[bind->index].living_neighborhoods);
        case Field::favored_neighborhoods:
            return names(m.resident_groups[bind->index].favored_neighborhoods);
        case Field::economic_status: {
            std::vector<std::string> out;
            for (auto e : m.resident_groups[bind->index].economic_status)
                out.emplace_back(to_string(e));
            return out;
        }
        case Field::professions: return m.resident_groups[bind->index].professions;
        case Field::iot_usage_preferences:
            return m.resident_groups[bind->index].iot_usage_preferences;
        case Field::project_goals: return m.governments[bind->index].project_goals;
        case Field::neighborhoods: return names(m.businesses[bind->index].neighborhoods);
        case Field::business_types: return m.businesses[bind->index].business_types;
        default: return {};
    }
}

std::size_t set_field_size(const EvalContext& ctx, const Env& env, const FieldRef& ref) {
    const Binding* bind = lookup(env, ref.var);
    const CityModel& m = ctx.model;
    switch (ref.field) {
        case Field::deploy_neighborhoods: return m.devices[bind->index].deploy_neighborhoods.size();
        case Field::living_neighborhoods:
            return m.resident_groups[bind->index].living_neighborhoods.size();
        case Field::favored_neighborhoods:
            return m.resident_groups[bind->index].favored_neighborhoods.size();
        case Field::economic_status: return m.resident_groups[bind->index].economic_status.size();
        case Field::professions: return m.resident_groups[bind->index].professions.size();
        case Field::iot_usage_preferences:
            return m.resident_groups[bind->index].iot_usage_preferences.size();
        case Field::project_goals: return m.governments[bind->index].project_goals.size();
        case Field::neighborhoods: return m.businesses[bind->index].neighborhoods.size();
        case Field::business_types: return m.businesses[bind->index].business_types.size();
        default: return 0;
    }
}

long long count_value(const EvalContext& ctx, const Env& env, const Term& term) {
    if (const auto* lit = std::get_if<Literal>(&term)) return lit->count_value;
    const auto& card = std::get<CardTerm>(term);
    const long long size = card.universe
                               ? static_cast<long long>(ctx.universe())
                               : static_cast<long long>(set_field_size(ctx, env, *card.set));
    return card.scale * size;
}

ScalarValue term_scalar(const EvalContext& ctx, const Env& env, const Term& term) {
    if (const auto* f = std::get_if<FieldRef>(&term)) return scalar_field(ctx, env, *f);
    const auto& lit = std::get<Literal>(term);
    ScalarValue out;
    if (lit.type == ScalarType::boolean) {
        out.is_bool = true;
        out.b = lit.bool_value;
    } else {
        out.token = lit.token;
    }
    return out;
}

bool flow_kind_matches(const std::optional<EntityKind>& pattern, EntityKind kind) {
    return !pattern || *pattern == kind;
}

// full = consent requirement satisfied; potential = flow matches except its
// consent is unknown while the pattern requires granted/denied.
enum class FlowMatch { none, potential, full };

FlowMatch match_flow(const FlowAtom& atom, const DataFlow& flow) {
    if (!flow_kind_matches(atom.source, flow.source.kind)) return FlowMatch::none;
    if (!flow_kind_matches(atom.dest, flow.dest.kind)) return FlowMatch::none;
    if (flow.payload != atom.payload) return FlowMatch::none;
    switch (atom.consent) {
        case ConsentPattern::any: return FlowMatch::full;
        case ConsentPattern::granted:
            if (flow.consent == Consent::granted) return FlowMatch::full;
            return flow.consent == Consent::unknown ? FlowMatch::potential : FlowMatch::none;
        case ConsentPattern::denied:
            if (flow.consent == Consent::denied) return FlowMatch::full;
            return flow.consent == Consent::unknown ? FlowMatch::potential : FlowMatch::none;
    }
    return FlowMatch::none;
}

TruthValue eval_flow_atom(const EvalContext& ctx, const FlowAtom& atom) {
    bool potential = false;
    for (const DataFlow& flow : ctx.model.flows) {
        switch (match_flow(atom, flow)) {
            case FlowMatch::full: return TruthValue::True;
            case FlowMatch::potential: potential = true; break;
            case FlowMatch::none: break;
        }
    }
    if (potential) return TruthValue::Unknown;
    return ctx.model.flows_complete ? TruthValue::False : TruthValue::Unknown;
}

TruthValue eval_node(const ExprPtr& e, const EvalContext& ctx, Env& env);

TruthValue eval_compare(const EvalContext& ctx, Env& env, const CompareExpr& cmp) {
    const bool counts = std::holds_alternative<CardTerm>(cmp.lhs) ||
                        std::holds_alternative<CardTerm>(cmp.rhs) ||
                        (std::holds_alternative<Literal>(cmp.lhs) &&
                         std::get<Literal>(cmp.lhs).type == ScalarType::count) ||
                        (std::holds_alternative<Literal>(cmp.rhs) &&
                         std::get<Literal>(cmp.rhs).type == ScalarType::count);
    if (counts) {
        const long long l = count_value(ctx, env, cmp.lhs);
        const long long r = count_value(ctx, env, cmp.rhs);
        switch (cmp.op) {
            case CompareOp::eq: return truth(l == r);
            case CompareOp::ne: return truth(l != r);
            case CompareOp::ge: return truth(l >= r);
            case CompareOp::le: return truth(l <= r);
            case CompareOp::gt: return truth(l > r);
            case CompareOp::lt: return truth(l < r);
        }
    }
    const ScalarValue l = term_scalar(ctx, env, cmp.lhs);
    const ScalarValue r = term_scalar(ctx, env, cmp.rhs);
    const bool eq = l.is_bool ? (l.b == r.b) : token_eq(l.token, r.token);
    return truth(cmp.op == CompareOp::eq ? eq : !eq);
}

TruthValue eval_member(const EvalContext& ctx, Env& env, const MemberExpr& member) {
    const ScalarValue elem = term_scalar(ctx, env, member.element);
    if (member.set_field) {
        for (const auto& token : set_field_tokens(ctx, env, *member.set_field)) {
            if (token_eq(token, elem.token)) return TruthValue::True;
        }
        return TruthValue::False;
    }
    for (const auto& token : member.set_literal) {
        if (token_eq(token, elem.token)) return TruthValue::True;
    }
    return TruthValue::False;
}

TruthValue eval_node(const ExprPtr& e, const EvalContext& ctx, Env& env) {
    if (const auto* q = std::get_if<Quantified>(&e->node)) {
        const std::size_t n = entity_count(ctx.model, q->domain);
        TruthValue acc = q->is_forall ? TruthValue::True : TruthValue::False;
        env.push_back({q->var, q->domain, 0});
        for (std::size_t i = 0; i < n; ++i) {
            env.back().index = i;
            const TruthValue v = eval_node(q->body, ctx, env);
            acc = q->is_forall ? tv_and(acc, v) : tv_or(acc, v);
            if (q->is_forall && acc == TruthValue::False) break;
            if (!q->is_forall && acc == TruthValue::True) break;
        }
        env.pop_back();
        return acc;
    }
    if (const auto* c = std::get_if<Connective>(&e->node)) {
        TruthValue acc = c->is_and ? TruthValue::True : TruthValue::False;
        for (const auto& op : c->operands) {
            const TruthValue v = eval_node(op, ctx, env);
            acc = c->is_and ? tv_and(acc, v) : tv_or(acc, v);
            if (c->is_and && acc == TruthValue::False) break;
            if (!c->is_and && acc == TruthValue::True) break;
        }
        return acc;
    }
    if (const auto* n = std::get_if<Negation>(&e->node)) {
        return tv_not(eval_node(n->operand, ctx, env));
    }
    if (const auto* cmp = std::get_if<CompareExpr>(&e->node)) {
        return eval_compare(ctx, env, *cmp);
    }
    if (const auto* m = std::get_if<MemberExpr>(&e->node)) {
        return eval_member(ctx, env, *m);
    }
    if (const auto* f = std::get_if<FlowAtom>(&e->node)) {
        return eval_flow_atom(ctx, *f);
    }
    if (const auto* b = std::get_if<BoolField>(&e->node)) {
        return truth(scalar_field(ctx, env, b->ref).b);
    }
    return truth(std::get<BoolConst>(e->node).value);
}

// ── Witness extraction ────────────────────────────────────────────────────

std::string scalar_desc(const ScalarValue& v) {
    if (v.is_bool) return v.b ? "true" : "false";
    return v.token;
}

std::string field_name_of(const Term& t) {
    if (const auto* f = std::get_if<FieldRef>(&t)) return std::string(field_info(f->field).name);
    return {};
}

std::string domain_plural(EntityKind k) {
    switch (k) {
        case EntityKind::device: return "devices";
        case EntityKind::residents: return "resident_groups";
        case EntityKind::government: return "governments";
        case EntityKind::business: return "businesses";
        case EntityKind::external: return "external";
    }
    return "?";
}

struct WitnessCollector {
    const EvalContext& ctx;
    Witness& witness;

    void add_atom(std::string atom) {
        if (witness.atoms.size() < 16) witness.atoms.push_back(std::move(atom));
    }

    // Explains why e evaluated to `actual` (True or False) under env.
    void culprits(const ExprPtr& e, Env& env, TruthValue actual) {
        if (const auto* q = std::get_if<Quantified>(&e->node)) {
            const std::size_t n = entity_count(ctx.model, q->domain);
            if (n == 0) {
                add_atom("no " + domain_plural(q->domain) + " declared");
                return;
            }
            const bool want = (actual == TruthValue::True) != q->is_forall;
            // forall false / exists true: the first deciding element.
            if (want) {
                env.push_back({q->var, q->domain, 0});
                for (std::size_t i = 0; i < n; ++i) {
                    env.back().index = i;
                    if (eval_node(q->body, ctx, env) == actual) {
                        witness.bindings.emplace_back(
                            q->var, entity_name(ctx.model, q->domain, i));
                        culprits(q->body, env, actual);
                        break;
                    }
                }
                env.pop_back();
            } else if (!q->is_forall) {
                add_atom("no " + q->var + " in " + domain_plural(q->domain) + " satisfies " +
                         print_expr(q->body));
            } else {
                add_atom("all " + domain_plural(q->domain) + " satisfy " + print_expr(q->body));
            }
            return;
        }
        if (const auto* c = std::get_if<Connective>(&e->node)) {
            for (const auto& op : c->operands) {
                Env scratch = env;
                if (eval_node(op, ctx, scratch) == actual) culprits(op, env, actual);
            }
            return;
        }
        if (const auto* n = std::get_if<Negation>(&e->node)) {
            culprits(n->operand, env, tv_not(actual));
            return;
        }
        if (const auto* cmp = std::get_if<CompareExpr>(&e->node)) {
            describe_compare(*cmp, env);
            return;
        }
        if (const auto* m = std::get_if<MemberExpr>(&e->node)) {
            describe_member(*m, env, actual);
            return;
        }
        if (const auto* f = std::get_if<FlowAtom>(&e->node)) {
            if (actual == TruthValue::True) {
                for (const DataFlow& flow : ctx.model.flows) {
                    if (match_flow(*f, flow) == FlowMatch::full) {
                        add_atom("flow " + describe_flow(flow));
                        if (witness.flows.size() < 8) witness.flows.push_back(flow);
                    }
                }
            } else {
                add_atom("no " + describe_flow_pattern(*f));
            }
            return;
        }
        if (const auto* b = std::get_if<BoolField>(&e->node)) {
            Env scratch = env;
            add_atom(std::string(field_info(b->ref.field).name) + " = " +
                     scalar_desc(scalar_field(ctx, scratch, b->ref)));
            return;
        }
        add_atom(std::get<BoolConst>(e->node).value ? "true" : "false");
    }

    void describe_compare(const CompareExpr& cmp, Env& env) {
        const bool counts = std::holds_alternative<CardTerm>(cmp.lhs) ||
                            std::holds_alternative<CardTerm>(cmp.rhs);
        if (counts) {
            std::string lhs = print_term(cmp.lhs);
            std::string rhs = print_term(cmp.rhs);
            add_atom(lhs + " = " + std::to_string(count_value(ctx, env, cmp.lhs)) + ", " + rhs +
                     " = " + std::to_string(count_value(ctx, env, cmp.rhs)));
            return;
        }
        // Field-against-value comparisons read as "field = actual".
        if (std::holds_alternative<FieldRef>(cmp.lhs)) {
            add_atom(field_name_of(cmp.lhs) + " = " +
                     scalar_desc(term_scalar(ctx, env, cmp.lhs)));
            return;
        }
        if (std::holds_alternative<FieldRef>(cmp.rhs)) {
            add_atom(field_name_of(cmp.rhs) + " = " +
                     scalar_desc(term_scalar(ctx, env, cmp.rhs)));
            return;
        }
        add_atom(print_term(cmp.lhs) + " " + std::string(to_string(cmp.op)) + " " +
                 print_term(cmp.rhs));
    }

    void describe_member(const MemberExpr& m, Env& env, TruthValue actual) {
        if (std::holds_alternative<FieldRef>(m.element)) {
            add_atom(field_name_of(m.element) + " = " +
                     scalar_desc(term_scalar(ctx, env, m.element)));
            return;
        }
        std::string set = m.set_field
                              ? std::string(field_info(m.set_field->field).name)
                              : "{...}";
        const std::string elem = std::get<Literal>(m.element).token;
        add_atom(elem + (actual == TruthValue::True ? " in " : " not in ") + set);
    }
};

void collect_witnesses(const ExprPtr& e, const EvalContext& ctx, Env& env,
                       std::vector<Witness>& out) {
    if (out.size() >= kWitnessCap) return;
    if (const auto* q = std::get_if<Quantified>(&e->node); q && q->is_forall) {
        const std::size_t n = entity_count(ctx.model, q->domain);
        env.push_back({q->var, q->domain, 0});
        for (std::size_t i = 0; i < n && out.size() < kWitnessCap; ++i) {
            env.back().index = i;
            if (eval_node(q->body, ctx, env) != TruthValue::False) continue;
            if (const auto* inner = std::get_if<Quantified>(&q->body->node);
                inner && inner->is_forall) {
                collect_witnesses(q->body, ctx, env, out);
            } else {
                Witness w;
                for (const Binding& b : env) {
                    w.bindings.emplace_back(b.var, entity_name(ctx.model, b.kind, b.index));
                }
                WitnessCollector{ctx, w}.culprits(q->body, env, TruthValue::False);
                out.push_back(std::move(w));
            }
        }
        env.pop_back();
        return;
    }
    Witness w;
    for (const Binding& b : env) {
        w.bindings.emplace_back(b.var, entity_name(ctx.model, b.kind, b.index));
    }
    WitnessCollector{ctx, w}.culprits(e, env, TruthValue::False);
    out.push_back(std::move(w));
}

void collect_unknowns(const ExprPtr& e, const EvalContext& ctx, Env& env,
                      std::vector<std::string>& out) {
    auto add = [&out](std::string atom) {
        if (out.size() >= kWitnessCap) return;
        if (std::find(out.begin(), out.end(), atom) == out.end()) out.push_back(std::move(atom));
    };
    if (const auto* q = std::get_if<Quantified>(&e->node)) {
        const std::size_t n = entity_count(ctx.model, q->domain);
        env.push_back({q->var, q->domain, 0});
        for (std::size_t i = 0; i < n; ++i) {
            env.back().index = i;
            if (eval_node(q->body, ctx, env) == TruthValue::Unknown) {
                collect_unknowns(q->body, ctx, env, out);
            }
        }
        env.pop_back();
        return;
    }
    if (const auto* c = std::get_if<Connective>(&e->node)) {
        for (const auto& op : c->operands) {
            if (eval_node(op, ctx, env) == TruthValue::Unknown) {
                collect_unknowns(op, ctx, env, out);
            }
        }
        return;
    }
    if (const auto* n = std::get_if<Negation>(&e->node)) {
        collect_unknowns(n->operand, ctx, env, out);
        return;
    }
    if (const auto* f = std::get_if<FlowAtom>(&e->node)) {
        add(describe_flow_pattern(*f));
        return;
    }
    add(print_expr(e));
}

}  // namespace

TruthValue eval_expr(const ExprPtr& expr, const CityModel& model, const Env& env) {
    EvalContext ctx{model, std::nullopt};
    Env scratch = env;
    return eval_node(expr, ctx, scratch);
}

Verdict eval_rule(const RuleDef& rule, const CityModel& model) {
    EvalContext ctx{model, std::nullopt};
    Env env;
    const TruthValue v = eval_node(rule.expr, ctx, env);
    Verdict verdict;
    switch (v) {
        case TruthValue::True: verdict.kind = Verdict::Kind::compliant; break;
        case TruthValue::False: {
            verdict.kind = Verdict::Kind::violated;
            Env scratch;
            collect_witnesses(rule.expr, ctx, scratch, verdict.witnesses);
            break;
        }
        case TruthValue::Unknown: {
            verdict.kind = Verdict::Kind::indeterminate;
            Env scratch;
            collect_unknowns(rule.expr, ctx, scratch, verdict.unknown_atoms);
            break;
        }
    }
    return verdict;
}

std::string explain(const Verdict& verdict, const RuleDef& rule) {
    std::string head = rule.id + " (" + std::string(to_string(rule.right)) + ", " +
                       rule.perspective.first + "-" + rule.perspective.second + ")";
    switch (verdict.kind) {
        case Verdict::Kind::compliant: return head + " holds.";
        case Verdict::Kind::violated: {
            std::string out = head + " violated";
            if (!verdict.witnesses.empty()) {
                const Witness& w = verdict.witnesses.front();
                out += ": ";
                bool first = true;
                for (const auto& [var, name] : w.bindings) {
                    if (!first) out += ", ";
                    out += var + " = " + name;
                    first = false;
                }
                if (!w.bindings.empty() && !w.atoms.empty()) out += ": ";
                for (std::size_t i = 0; i < w.atoms.size(); ++i) {
                    if (i) out += ", ";
                    out += w.atoms[i];
                }
                if (verdict.witnesses.size() > 1) {
                    out += " (and " + std::to_string(verdict.witnesses.size() - 1) +
                           " more witness" + (verdict.witnesses.size() > 2 ? "es" : "") + ")";
                }
            }
            out += ".";
            return out;
        }
        case Verdict::Kind::indeterminate: {
            std::string out = head + " is undetermined: unknown ";
            for (std::size_t i = 0; i < verdict.unknown_atoms.size(); ++i) {
                if (i) out += "; ";
                out += verdict.unknown_atoms[i];
            }
            out += ". Supply a .facts override to decide.";
            return out;
        }
    }
    return head;
}

}  // namespace civitas
