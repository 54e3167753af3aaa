#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "civitas/diagnostics.hpp"
#include "civitas/model.hpp"

namespace civitas {

// ── Three-valued logic (strong Kleene) ────────────────────────────────────

enum class TruthValue { False = 0, Unknown = 1, True = 2 };

constexpr TruthValue truth(bool b) { return b ? TruthValue::True : TruthValue::False; }
constexpr TruthValue tv_not(TruthValue v) {
    return static_cast<TruthValue>(2 - static_cast<int>(v));
}
constexpr TruthValue tv_and(TruthValue a, TruthValue b) { return a < b ? a : b; }
constexpr TruthValue tv_or(TruthValue a, TruthValue b) { return a > b ? a : b; }
constexpr TruthValue tv_implies(TruthValue a, TruthValue b) { return tv_or(tv_not(a), b); }

std::string_view to_string(TruthValue v);

// ── Typed fields ──────────────────────────────────────────────────────────

enum class ScalarType { boolean, count, text, movement, interaction, risk, econ, scale };
enum class SetElemType { neighborhood, econ, text };

enum class Field {
    device_title,
    deploy_neighborhoods,
    movement_type,
    interaction_type,
    risk_type,
    transmits_harmful,
    collects_resident_data,
    agreement_violated,
    living_neighborhoods,
    favored_neighborhoods,
    economic_status,
    professions,
    iot_usage_preferences,
    has_legitimate_authority,
    gov_type,
    project_goals,
    oversight_iot_safety,
    enforce_safety_standards,
    scale,
    neighborhoods,
    business_types,
};

struct FieldInfo {
    Field id;
    EntityKind kind;
    std::string_view name;
    bool is_set;
    ScalarType scalar;   // meaningful when !is_set
    SetElemType elem;    // meaningful when is_set
};

const FieldInfo& field_info(Field f);
const FieldInfo* find_field(EntityKind kind, std::string_view name);
std::vector<std::string> field_names(EntityKind kind);

// ── Rule AST ──────────────────────────────────────────────────────────────

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct FieldRef {
    std::string var;
    Field field = Field::device_title;
};

struct Literal {
    ScalarType type = ScalarType::text;
    bool bool_value = false;
    long long count_value = 0;
    std::string token;  // canonical spelling for enum families
};

/// scale * card(field or universe)
struct CardTerm {
    long long scale = 1;
    bool universe = false;
    std::optional<FieldRef> set;
};

using Term = std::variant<FieldRef, Literal, CardTerm>;

enum class CompareOp { eq, ne, ge, le, gt, lt };
std::string_view to_string(CompareOp op);

enum class ConsentPattern { any, granted, denied };

struct Quantified {
    bool is_forall = true;
    std::string var;
    EntityKind domain = EntityKind::device;
    ExprPtr body;
};

struct Connective {
    bool is_and = true;
    std::vector<ExprPtr> operands;
};

struct Negation {
    ExprPtr operand;
};

struct CompareExpr {
    CompareOp op = CompareOp::eq;
    Term lhs;
    Term rhs;
};

struct MemberExpr {
    Term element;                          // FieldRef or Literal
    std::optional<FieldRef> set_field;     // exactly one of set_field / set_literal
    std::vector<std::string> set_literal;  // canonical tokens
};

struct FlowAtom {
    std::optional<EntityKind> source;  // nullopt matches any kind
    std::optional<EntityKind> dest;
    PayloadKind payload = PayloadKind::generic_message;
    ConsentPattern consent = ConsentPattern::any;
};

struct BoolField {
    FieldRef ref;
};

struct BoolConst {
    bool value = true;
};

struct Expr {
    std::variant<Quantified, Connective, Negation, CompareExpr, MemberExpr, FlowAtom, BoolField,
                 BoolConst>
        node;
};

template <typename Node>
ExprPtr make_expr(Node node) {
    return std::make_shared<Expr>(Expr{std::move(node)});
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b);
std::string print_expr(const ExprPtr& e);
std::string describe_flow_pattern(const FlowAtom& f);

// ── Rule definitions ──────────────────────────────────────────────────────

enum class Right { safety, privacy, fairness, truth, what_is_agreed, authority };

std::string_view to_string(Right r);
std::optional<Right> parse_right(std::string_view token);

struct RuleDef {
    std::string id;
    Right right = Right::safety;
    std::pair<std::string, std::string> perspective;
    std::string statement;
    ExprPtr expr;
};

bool rule_equal(const RuleDef& a, const RuleDef& b);

/// Parses one `rule <ID> right=<r> perspective=<a>-<b> [statement="..."] : <expr>`
/// definition. Rules are type checked during parsing; syntax and type errors
/// carry a source span.
RuleDef parse_rule(std::string_view text);

/// Parses a whole `.rules` file (one or more rule blocks, '#' comments).
std::vector<RuleDef> parse_rules(std::string_view text);

// ── Evaluation ────────────────────────────────────────────────────────────

struct Binding {
    std::string var;
    EntityKind kind = EntityKind::device;
    std::size_t index = 0;
};
using Env = std::vector<Binding>;

/// Strong-Kleene evaluation. Total over well-typed input: quantifiers fold
/// their domain in declaration order, flow atoms go unknown when the flow
/// set is not declared complete or a consent requirement meets an unknown
/// consent.
TruthValue eval_expr(const ExprPtr& expr, const CityModel& model, const Env& env = {});

struct Witness {
    std::vector<std::pair<std::string, std::string>> bindings;  // var -> entity name
    std::vector<std::string> atoms;
    std::vector<DataFlow> flows;

    friend bool operator==(const Witness&, const Witness&) = default;
};

struct Verdict {
    enum class Kind { compliant, violated, indeterminate };

    Kind kind = Kind::compliant;
    std::vector<Witness> witnesses;           // violated: at least one
    std::vector<std::string> unknown_atoms;   // indeterminate: at least one

    bool is_compliant() const { return kind == Kind::compliant; }
    bool is_violated() const { return kind == Kind::violated; }
    bool is_indeterminate() const { return kind == Kind::indeterminate; }

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

std::string_view to_string(Verdict::Kind k);

inline constexpr std::size_t kWitnessCap = 32;

Verdict eval_rule(const RuleDef& rule, const CityModel& model);

/// One human-readable sentence: rule id, right, perspective, and either the
/// leading witness or the missing facts.
std::string explain(const Verdict& verdict, const RuleDef& rule);

}  // namespace civitas
