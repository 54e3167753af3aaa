#include "civitas/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "civitas/builtins.hpp"
#include "civitas/finder.hpp"
#include "civitas/pipeline.hpp"
#include "civitas/scenario.hpp"

namespace civitas {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

int exit_code_for(const VerdictCounts& summary) {
    if (summary.violated > 0) return kExitViolation;
    if (summary.indeterminate > 0) return kExitIndeterminate;
    return kExitOk;
}

struct CheckOptions {
    std::string scenario_path;
    std::string rules_path;
    std::string facts_path;
    std::string world = "open";
    std::string format = "text";
    std::string out_path;
};

int cmd_check(const CheckOptions& opt, std::ostream& out, std::ostream& err, bool color) {
    CityModel model;
    try {
        model = parse_scenario(read_file(opt.scenario_path));
    } catch (const ParseError& e) {
        err << opt.scenario_path << ":" << e.what() << "\n";
        return kExitError;
    }

    RuleSet ruleset = builtin_ruleset();
    if (!opt.rules_path.empty()) {
        try {
            ruleset = RuleSet{opt.rules_path, parse_rules(read_file(opt.rules_path))};
        } catch (const ParseError& e) {
            err << opt.rules_path << ":" << e.what() << "\n";
            return kExitError;
        }
    }

    FactSet facts;
    const bool have_facts = !opt.facts_path.empty();
    if (have_facts) {
        try {
            facts = parse_facts(read_file(opt.facts_path));
        } catch (const ParseError& e) {
            err << opt.facts_path << ":" << e.what() << "\n";
            return kExitError;
        }
    }

    const WorldMode mode = opt.world == "closed" ? WorldMode::closed : WorldMode::open;
    const JudgmentReport report = judge(model, ruleset, have_facts ? &facts : nullptr, mode);
    const ReportFormat format =
        opt.format == "json" ? ReportFormat::json : ReportFormat::text;
    const std::string rendered =
        render_report(report, format, color && format == ReportFormat::text &&
                                          opt.out_path.empty());
    if (opt.out_path.empty()) {
        out << rendered;
    } else {
        write_file(opt.out_path, rendered);
    }
    return exit_code_for(report.summary);
}

RuleDef resolve_rule(const std::string& spec) {
    try {
        return builtin_rule(spec);
    } catch (const UnknownRuleError&) {
    }
    if (!std::filesystem::exists(spec)) {
        throw std::runtime_error("'" + spec +
                                 "' is neither a built-in rule id (P1..P13, SafetyPrinciple) "
                                 "nor a rule file");
    }
    auto rules = parse_rules(read_file(spec));
    if (rules.size() != 1) {
        throw std::runtime_error("'" + spec + "' defines " + std::to_string(rules.size()) +
                                 " rules; pass a file with exactly one");
    }
    return rules.front();
}

int cmd_find(const std::string& rule_spec, const std::string& scope_spec, std::ostream& out,
             std::ostream& err) {
    RuleDef rule;
    try {
        rule = resolve_rule(rule_spec);
    } catch (const ParseError& e) {
        err << rule_spec << ":" << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    Scope scope;
    try {
        scope = parse_scope(scope_spec);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }

    const CheckResult result = find_counterexample(rule, scope);
    switch (result.kind) {
        case CheckResult::Kind::counterexample:
            out << "counterexample to " << rule.id << " ("
                << result.candidates_examined << " candidates examined):\n\n"
                << render_scenario(*result.model);
            return kExitViolation;
        case CheckResult::Kind::holds_within_scope:
            out << rule.id << " holds within scope (" << result.candidates_examined
                << " candidates examined)\n";
            return kExitOk;
        case CheckResult::Kind::budget_exhausted:
            out << "budget exhausted after " << result.candidates_examined
                << " candidates; no counterexample found\n";
            return kExitIndeterminate;
    }
    return kExitError;
}

int cmd_rules(const std::string& action, const std::string& id, std::ostream& out,
              std::ostream& err) {
    if (action == "list") {
        for (const RuleDef& rule : builtin_ruleset().rules) {
            std::string line = rule.id;
            line.append(rule.id.size() < 5 ? 5 - rule.id.size() : 1, ' ');
            std::string right(to_string(rule.right));
            line += right;
            line.append(right.size() < 16 ? 16 - right.size() : 1, ' ');
            std::string perspective = rule.perspective.first + "-" + rule.perspective.second;
            line += perspective;
            line.append(perspective.size() < 26 ? 26 - perspective.size() : 1, ' ');
            line += rule.statement;
            out << line << "\n";
        }
        return kExitOk;
    }
    if (action == "show") {
        if (id.empty()) {
            err << "error: 'rules show' needs a rule id\n";
            return kExitError;
        }
        try {
            out << rule_source(id);
        } catch (const UnknownRuleError& e) {
            err << "error: " << e.what() << "\n";
            return kExitError;
        }
        return kExitOk;
    }
    err << "error: unknown rules action '" << action << "' (expected list or show)\n";
    return kExitError;
}

int cmd_fmt(const std::string& path, bool check_only, std::ostream& out, std::ostream& err) {
    std::string original;
    CityModel model;
    try {
        original = read_file(path);
        model = parse_scenario(original);
    } catch (const ParseError& e) {
        err << path << ":" << e.what() << "\n";
        return kExitError;
    }
    const std::string canonical = render_scenario(model);
    if (canonical == original) return kExitOk;
    if (check_only) {
        out << "would reformat " << path << "\n";
        return kExitViolation;
    }
    write_file(path, canonical);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            bool color) {
    CLI::App app{"civitas - rights-based compliance checks for smart city scenario models"};
    app.require_subcommand(1);

    CheckOptions check_opt;
    CLI::App* check = app.add_subcommand("check", "judge a scenario against a ruleset");
    check->add_option("scenario", check_opt.scenario_path, "scenario file (.city)")->required();
    check->add_option("--rules", check_opt.rules_path, "rule file replacing the built-ins");
    check->add_option("--facts", check_opt.facts_path, "human-supplied fact overrides (.facts)");
    check->add_option("--world", check_opt.world, "open or closed world (default open)")
        ->check(CLI::IsMember({"open", "closed"}));
    check->add_option("--format", check_opt.format, "text or json (default text)")
        ->check(CLI::IsMember({"text", "json"}));
    check->add_option("--out", check_opt.out_path, "write the report to a file");

    std::string find_rule, find_scope;
    CLI::App* find = app.add_subcommand("find", "search a scope for a counterexample");
    find->add_option("--rule", find_rule, "built-in rule id or rule file")->required();
    find->add_option("--scope", find_scope,
                     "bounds, e.g. devices=1,residents=1,neighborhoods=3,flows=2");

    std::vector<std::string> rules_args;
    CLI::App* rules = app.add_subcommand("rules", "list built-in rules or show one");
    rules->add_option("action", rules_args, "list | show <id>")->expected(1, 2);

    std::string fmt_path;
    bool fmt_check = false;
    CLI::App* fmt = app.add_subcommand("fmt", "rewrite a scenario to canonical form");
    fmt->add_option("path", fmt_path, "scenario file (.city)")->required();
    fmt->add_flag("--check", fmt_check, "exit 2 instead of rewriting when not canonical");

    std::vector<std::string> argv_storage;
    argv_storage.push_back("civitas");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(argv_storage.size());
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }

    try {
        if (check->parsed()) return cmd_check(check_opt, out, err, color);
        if (find->parsed()) return cmd_find(find_rule, find_scope, out, err);
        if (rules->parsed()) {
            const std::string action = rules_args.empty() ? "" : rules_args[0];
            const std::string id = rules_args.size() > 1 ? rules_args[1] : "";
            return cmd_rules(action, id, out, err);
        }
        if (fmt->parsed()) return cmd_fmt(fmt_path, fmt_check, out, err);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    err << "error: no subcommand given\n";
    return kExitError;
}

}  // namespace civitas
