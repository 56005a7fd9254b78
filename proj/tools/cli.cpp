#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <thread>

#include "shadow_audit/audit.hpp"
#include "shadow_audit/binding.hpp"
#include "shadow_audit/cost_model.hpp"
#include "shadow_audit/error.hpp"
#include "shadow_audit/model.hpp"
#include "shadow_audit/recalc.hpp"
#include "shadow_audit/scenario.hpp"
#include "shadow_audit/shadow_eval.hpp"
#include "shadow_audit/text.hpp"

namespace shadow_audit {

namespace {

struct Options {
    std::string workbook, model, bindings, data, out, cell;
    std::vector<std::string> include_paths;
    std::string suite = "full";
    std::size_t random = 0;
    std::optional<std::uint64_t> seed;
    double abs_tol = Tolerance{}.abs;
    double rel_tol = Tolerance{}.rel;
    std::string format = "human";
    std::vector<int> dims{1, 2, 3, 4};
    std::string levels = "1..30";
    double cost_minutes = 3.0;
    double ratio = 2.0;
};

/// Result text goes to --out when given, else to `out`.
void emit(const Options& o, std::ostream& out, const std::string& text) {
    if (o.out.empty()) {
        out << text;
        return;
    }
    write_file(o.out, text);
}

unsigned thread_count() {
    const char* env = std::getenv("SHADOW_AUDIT_THREADS");
    if (!env) return std::max(1u, std::thread::hardware_concurrency());
    auto v = parse_decimal(env);
    if (!v || *v < 0 || *v != static_cast<unsigned>(*v))
        throw Error(ErrorKind::InvalidArgument, "SHADOW_AUDIT_THREADS must be a non-negative integer");
    return static_cast<unsigned>(*v);
}

Suite suite_of(const std::string& name) {
    if (name == "full") return Suite::Full;
    if (name == "default") return Suite::Default;
    if (name == "oat") return Suite::OneAtATime;
    return Suite::Pairwise;
}

std::shared_ptr<const model::Model> load_shared_model(const Options& o) {
    return std::make_shared<const model::Model>(model::load_model(o.model, o.include_paths));
}

std::vector<Scenario> scenarios_for(const Options& o, const BindingSet& bindings) {
    return generate_suite(bindings.vars, suite_of(o.suite), o.random, o.seed.value_or(0));
}

int cmd_audit(const Options& o, std::ostream& out, std::ostream& err) {
    auto wb = load_workbook(o.workbook);
    auto m = load_shared_model(o);
    auto bindings = load_bindings(o.bindings, *m);
    auto scenarios = scenarios_for(o, bindings);
    auto report = run_audit(wb, m, bindings, scenarios, Tolerance{o.abs_tol, o.rel_tol}, thread_count());
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
    emit(o, out, format_report(report, o.format == "csv" ? ReportMode::Csv : ReportMode::Human));
    return report.failures() == 0 ? 0 : 1;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream&) {
    auto wb = load_workbook(o.workbook);
    auto values = recalculate(wb);
    std::string text;
    if (!o.cell.empty()) {
        auto addr = CellAddress::parse(o.cell);
        const auto& content = wb.get_cell(addr);
        if (content.kind() == CellContent::Kind::Text)
            text = addr.to_string() + " = " + content.as_text() + "\n";
        else
            text = addr.to_string() + " = " + format_number(content.is_empty() ? 0.0 : values.at(addr)) + "\n";
    } else {
        wb.for_each_cell([&](const CellAddress& a, const CellContent& c) {
            if (c.kind() == CellContent::Kind::Formula) text += a.to_string() + " = " + format_number(values.at(a)) + "\n";
        });
    }
    emit(o, out, text);
    return 0;
}

int cmd_shadow_eval(const Options& o, std::ostream& out, std::ostream& err) {
    auto m = load_shared_model(o);
    auto store = load_data(m, o.data.empty() ? std::vector<Assignment>{} : load_data_file(o.data));
    for (const auto& name : m->unused_inputs()) err << "warning: unused input " << name << "\n";
    for (const auto& w : store.missing_input_warnings()) err << "warning: " << w << "\n";
    store.evaluate();
    std::string text;
    for (const auto& p : m->params()) {
        if (p.role != model::ParamRole::Defined) continue;
        for (const auto& t : store.domain_tuples(p.name))
            text += p.name + format_tuple(t) + " = " + format_number(store.query(p.name, t)) + "\n";
    }
    emit(o, out, text);
    return 0;
}

int cmd_scenarios(const Options& o, std::ostream& out, std::ostream&) {
    auto m = load_shared_model(o);
    auto bindings = load_bindings(o.bindings, *m);
    emit(o, out, emit_scenarios(scenarios_for(o, bindings)));
    return 0;
}

int cmd_cost_model(const Options& o, std::ostream& out, std::ostream&) {
    auto dots = o.levels.find("..");
    std::optional<double> lo, hi;
    if (dots != std::string::npos) {
        lo = parse_decimal(std::string_view(o.levels).substr(0, dots));
        hi = parse_decimal(std::string_view(o.levels).substr(dots + 2));
    }
    if (!lo || !hi || *lo != static_cast<std::int64_t>(*lo) || *hi != static_cast<std::int64_t>(*hi))
        throw Error(ErrorKind::InvalidArgument, "--levels expects A..B with integers A <= B, got '" + o.levels + "'");
    emit(o, out,
         cost::emit_curves(o.dims, static_cast<std::int64_t>(*lo), static_cast<std::int64_t>(*hi), o.cost_minutes, o.ratio));
    return 0;
}

void add_suite_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--suite", o.suite, "Scenario strategy")
        ->check(CLI::IsMember({"full", "default", "oat", "pairwise"}))
        ->capture_default_str();
    auto* random = cmd->add_option("--random", o.random, "Append N random scenarios");
    auto* seed = cmd->add_option("--seed", o.seed, "Seed for random scenarios");
    random->needs(seed);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Audit a workbook against an independent shadow model", "shadow-audit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    auto* audit = app.add_subcommand("audit", "Run scenarios through workbook and shadow model and compare outputs");
    audit->add_option("-w,--workbook", o.workbook, "Workbook file")->required();
    audit->add_option("-m,--model", o.model, "Shadow model file")->required();
    audit->add_option("-b,--bindings", o.bindings, "Binding file")->required();
    audit->add_option("-I,--include-path", o.include_paths, "Extra directories searched by INCLUDE");
    add_suite_flags(audit, o);
    audit->add_option("--abs", o.abs_tol, "Absolute tolerance")->check(CLI::NonNegativeNumber)->capture_default_str();
    audit->add_option("--rel", o.rel_tol, "Relative tolerance")->check(CLI::NonNegativeNumber)->capture_default_str();
    audit->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"human", "csv"}))->capture_default_str();
    audit->add_option("-o,--out", o.out, "Write the report here instead of standard output");

    auto* eval = app.add_subcommand("eval", "Recalculate a workbook and print cell values");
    eval->add_option("-w,--workbook", o.workbook, "Workbook file")->required();
    eval->add_option("--cell", o.cell, "Print only this cell, e.g. Results!B2");
    eval->add_option("-o,--out", o.out, "Output file");

    auto* shadow = app.add_subcommand("shadow-eval", "Evaluate a shadow model over a data file");
    shadow->add_option("-m,--model", o.model, "Shadow model file")->required();
    shadow->add_option("-d,--data", o.data, "Data file");
    shadow->add_option("-I,--include-path", o.include_paths, "Extra directories searched by INCLUDE");
    shadow->add_option("-o,--out", o.out, "Output file");

    auto* scen = app.add_subcommand("scenarios", "Print the generated scenario set without running it");
    scen->add_option("-m,--model", o.model, "Shadow model file")->required();
    scen->add_option("-b,--bindings", o.bindings, "Binding file")->required();
    scen->add_option("-I,--include-path", o.include_paths, "Extra directories searched by INCLUDE");
    add_suite_flags(scen, o);
    scen->add_option("-o,--out", o.out, "Output file");

    auto* cost = app.add_subcommand("cost-model", "Emit effort curves for both audit approaches as CSV");
    cost->add_option("--dims", o.dims, "Dimension counts")->delimiter(',')->check(CLI::PositiveNumber);
    cost->add_option("--levels", o.levels, "Level range A..B")->capture_default_str();
    cost->add_option("--cost-minutes", o.cost_minutes, "Minutes per distinct formula")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cost->add_option("--ratio", o.ratio, "Around-audit cost in distinct formulas")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cost->add_option("-o,--out", o.out, "Output file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*audit) return cmd_audit(o, out, err);
        if (*eval) return cmd_eval(o, out, err);
        if (*shadow) return cmd_shadow_eval(o, out, err);
        if (*scen) return cmd_scenarios(o, out, err);
        return cmd_cost_model(o, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace shadow_audit
