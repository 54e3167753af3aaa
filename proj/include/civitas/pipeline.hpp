#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "civitas/builtins.hpp"
#include "civitas/model.hpp"
#include "civitas/rules.hpp"

namespace civitas {

enum class WorldMode { open, closed };
std::string_view to_string(WorldMode m);

struct ReportEntry {
    std::string rule_id;
    Right right = Right::safety;
    std::pair<std::string, std::string> perspective;
    Verdict verdict;
    std::string explanation;
};

struct VerdictCounts {
    std::size_t compliant = 0;
    std::size_t violated = 0;
    std::size_t indeterminate = 0;

    std::size_t total() const { return compliant + violated + indeterminate; }

    friend bool operator==(const VerdictCounts&, const VerdictCounts&) = default;
};

struct JudgmentReport {
    std::string scenario_name;
    WorldMode world_mode = WorldMode::open;
    std::size_t facts_applied = 0;
    std::vector<ReportEntry> entries;  // ordered by rule id (natural order)
    VerdictCounts summary;
};

/**
 * Runs the full judgment: applies facts (when given), forces the closed
 * world if asked, evaluates every rule and assembles the report. Pure; fact
 * resolution failures propagate as FactError.
 */
JudgmentReport judge(const CityModel& model, const RuleSet& ruleset,
                     const FactSet* facts = nullptr, WorldMode mode = WorldMode::open);

struct Aggregate {
    std::vector<std::pair<Right, VerdictCounts>> by_right;
    std::vector<std::pair<std::pair<std::string, std::string>, VerdictCounts>> by_perspective;
};

/// Verdict counts grouped by right and by perspective pair, in a fixed key
/// order (rights in their canonical order, perspectives by first use).
Aggregate aggregate(const JudgmentReport& report);

enum class ReportFormat { text, json };

/// Text is a grouped, human-readable listing; json follows the report schema
/// and is byte-stable for identical inputs.
std::string render_report(const JudgmentReport& report, ReportFormat format, bool color = false);

}  // namespace civitas
