#include "civitas/pipeline.hpp"

#include <algorithm>
#include <array>

#include <json.hpp>

namespace civitas {

std::string_view to_string(WorldMode m) { return m == WorldMode::open ? "open" : "closed"; }

JudgmentReport judge(const CityModel& model, const RuleSet& ruleset, const FactSet* facts,
                     WorldMode mode) {
    CityModel working = facts ? apply_facts(model, *facts) : model;
    if (mode == WorldMode::closed) working.flows_complete = true;

    JudgmentReport report;
    report.scenario_name = working.scenario_name;
    report.world_mode = mode;
    report.facts_applied = facts ? facts->size() : 0;

    for (const RuleDef& rule : ruleset.rules) {
        ReportEntry entry;
        entry.rule_id = rule.id;
        entry.right = rule.right;
        entry.perspective = rule.perspective;
        entry.verdict = eval_rule(rule, working);
        entry.explanation = explain(entry.verdict, rule);
        report.entries.push_back(std::move(entry));
    }
    std::stable_sort(report.entries.begin(), report.entries.end(),
                     [](const ReportEntry& a, const ReportEntry& b) {
                         return natural_compare(a.rule_id, b.rule_id) < 0;
                     });
    for (const ReportEntry& entry : report.entries) {
        switch (entry.verdict.kind) {
            case Verdict::Kind::compliant: ++report.summary.compliant; break;
            case Verdict::Kind::violated: ++report.summary.violated; break;
            case Verdict::Kind::indeterminate: ++report.summary.indeterminate; break;
        }
    }
    return report;
}

Aggregate aggregate(const JudgmentReport& report) {
    Aggregate out;
    static constexpr std::array<Right, 6> kRightOrder = {
        Right::safety, Right::privacy,        Right::fairness,
        Right::truth,  Right::what_is_agreed, Right::authority,
    };
    for (Right right : kRightOrder) {
        VerdictCounts counts;
        bool any = false;
        for (const ReportEntry& e : report.entries) {
            if (e.right != right) continue;
            any = true;
            switch (e.verdict.kind) {
                case Verdict::Kind::compliant: ++counts.compliant; break;
                case Verdict::Kind::violated: ++counts.violated; break;
                case Verdict::Kind::indeterminate: ++counts.indeterminate; break;
            }
        }
        if (any) out.by_right.emplace_back(right, counts);
    }
    for (const ReportEntry& e : report.entries) {
        auto it = std::find_if(out.by_perspective.begin(), out.by_perspective.end(),
                               [&e](const auto& p) {
                                   return token_eq(p.first.first, e.perspective.first) &&
                                          token_eq(p.first.second, e.perspective.second);
                               });
        if (it == out.by_perspective.end()) {
            out.by_perspective.emplace_back(e.perspective, VerdictCounts{});
            it = std::prev(out.by_perspective.end());
        }
        switch (e.verdict.kind) {
            case Verdict::Kind::compliant: ++it->second.compliant; break;
            case Verdict::Kind::violated: ++it->second.violated; break;
            case Verdict::Kind::indeterminate: ++it->second.indeterminate; break;
        }
    }
    return out;
}

namespace {

std::string render_json(const JudgmentReport& report) {
    nlohmann::ordered_json doc;
    doc["scenario"] = report.scenario_name;
    doc["world_mode"] = std::string(to_string(report.world_mode));
    doc["facts_applied"] = report.facts_applied;
    doc["entries"] = nlohmann::ordered_json::array();
    for (const ReportEntry& e : report.entries) {
        nlohmann::ordered_json entry;
        entry["rule"] = e.rule_id;
        entry["right"] = std::string(to_string(e.right));
        entry["perspective"] = {e.perspective.first, e.perspective.second};
        entry["verdict"] = std::string(to_string(e.verdict.kind));
        entry["witnesses"] = nlohmann::ordered_json::array();
        for (const Witness& w : e.verdict.witnesses) {
            nlohmann::ordered_json witness;
            witness["bindings"] = nlohmann::ordered_json::object();
            for (const auto& [var, name] : w.bindings) witness["bindings"][var] = name;
            witness["atoms"] = w.atoms;
            witness["flows"] = nlohmann::ordered_json::array();
            for (const DataFlow& f : w.flows) witness["flows"].push_back(describe_flow(f));
            entry["witnesses"].push_back(std::move(witness));
        }
        entry["unknowns"] = e.verdict.unknown_atoms;
        entry["explanation"] = e.explanation;
        doc["entries"].push_back(std::move(entry));
    }
    doc["summary"] = {{"compliant", report.summary.compliant},
                      {"violated", report.summary.violated},
                      {"indeterminate", report.summary.indeterminate}};
    return doc.dump(2) + "\n";
}

const char* verdict_color(Verdict::Kind k) {
    switch (k) {
        case Verdict::Kind::compliant: return "\x1b[32m";
        case Verdict::Kind::violated: return "\x1b[31m";
        case Verdict::Kind::indeterminate: return "\x1b[33m";
    }
    return "";
}

std::string render_text(const JudgmentReport& report, bool color) {
    std::string out;
    out += "scenario: " + report.scenario_name + "\n";
    out += "world: " + std::string(to_string(report.world_mode)) +
           "   facts applied: " + std::to_string(report.facts_applied) + "\n";

    const Aggregate groups = aggregate(report);
    for (const auto& [right, counts] : groups.by_right) {
        out += "\n";
        std::string heading = fold_case(std::string(to_string(right)));
        std::transform(heading.begin(), heading.end(), heading.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        out += heading + "\n";
        for (const ReportEntry& e : report.entries) {
            if (e.right != right) continue;
            std::string verdict(to_string(e.verdict.kind));
            if (color) {
                verdict = verdict_color(e.verdict.kind) + verdict + "\x1b[0m";
            }
            out += "  " + e.rule_id;
            out.append(e.rule_id.size() < 4 ? 4 - e.rule_id.size() : 1, ' ');
            std::string perspective = e.perspective.first + "-" + e.perspective.second;
            out += perspective;
            out.append(perspective.size() < 24 ? 24 - perspective.size() : 1, ' ');
            out += verdict + "  " + e.explanation + "\n";
        }
    }
    out += "\nsummary: " + std::to_string(report.summary.compliant) + " compliant, " +
           std::to_string(report.summary.violated) + " violated, " +
           std::to_string(report.summary.indeterminate) + " indeterminate\n";
    return out;
}

}  // namespace

std::string render_report(const JudgmentReport& report, ReportFormat format, bool color) {
    return format == ReportFormat::json ? render_json(report) : render_text(report, color);
}

}  // namespace civitas
