#include "shadow_audit/audit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "shadow_audit/error.hpp"
#include "shadow_audit/recalc.hpp"
#include "shadow_audit/text.hpp"

namespace shadow_audit {

bool Tolerance::accepts(double a, double b) const noexcept {
    double diff = std::fabs(a - b);
    return diff <= abs || diff <= rel * std::max(std::fabs(a), std::fabs(b));
}

std::size_t AuditReport::failures() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(findings.begin(), findings.end(), [](const AuditFinding& f) { return f.verdict == Verdict::Fail; }));
}

namespace {

struct OutputElement {
    std::string param;
    Tuple tuple;
    CellAddress cell;
};

std::string describe(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) return err->what();
    return std::string("InternalError: ") + e.what();
}

class ScenarioRun {
public:
    ScenarioRun(const Workbook& wb, const std::shared_ptr<const model::Model>& model, const BindingSet& bindings,
                const std::vector<OutputElement>& outputs, const Tolerance& tol)
        : wb_(wb), model_(model), bindings_(bindings), outputs_(outputs), tol_(tol) {}

    std::vector<AuditFinding> run(const Scenario& scenario) const {
        Workbook injected;
        ValueGrid values;
        try {
            injected = inject_scenario(wb_, bindings_, *model_, scenario);
            values = recalculate(injected);
        } catch (const std::exception& e) {
            return failed(scenario, "error: workbook: " + describe(e));
        }

        std::optional<DataStore> store;
        std::string shadow_error;
        try {
            store.emplace(load_data(model_, import_inputs(injected, values, bindings_, *model_)));
            store->evaluate();
        } catch (const std::exception& e) {
            shadow_error = "error: shadow: " + describe(e);
        }

        std::vector<std::string> scenario_warnings;
        try {
            for (const auto& w : check_triangular(injected, bindings_, *model_)) scenario_warnings.push_back("triangular: " + w);
        } catch (const std::exception& e) {
            scenario_warnings.push_back("error: triangular check: " + describe(e));
        }

        std::vector<OutputReading> readings;
        try {
            readings = read_outputs(injected, values, bindings_, *model_);
        } catch (const std::exception& e) {
            return failed(scenario, "error: outputs: " + describe(e));
        }

        std::vector<AuditFinding> out;
        for (const auto& r : readings) {
            AuditFinding f{scenario.id, r.param, r.tuple, r.address, r.value, 0.0, 0.0, 0.0, Verdict::Pass, scenario_warnings};
            if (r.empty_cell) f.warnings.push_back("empty-output");
            bool broken = false;
            if (r.error) {
                f.warnings.push_back("error: sheet: " + *r.error);
                broken = true;
            }
            if (!shadow_error.empty()) {
                f.warnings.push_back(shadow_error);
                broken = true;
            } else {
                try {
                    f.shadow_value = store->query(r.param, r.tuple);
                } catch (const std::exception& e) {
                    f.warnings.push_back("error: shadow: " + describe(e));
                    broken = true;
                }
            }
            if (broken) {
                f.verdict = Verdict::Fail;
                f.abs_diff = f.rel_diff = std::nan("");
            } else {
                f.abs_diff = std::fabs(f.sheet_value - f.shadow_value);
                double scale = std::max(std::fabs(f.sheet_value), std::fabs(f.shadow_value));
                f.rel_diff = scale == 0.0 ? 0.0 : f.abs_diff / scale;
                f.verdict = tol_.accepts(f.sheet_value, f.shadow_value) ? Verdict::Pass : Verdict::Fail;
            }
            out.push_back(std::move(f));
        }
        return out;
    }

private:
    std::vector<AuditFinding> failed(const Scenario& scenario, const std::string& note) const {
        std::vector<AuditFinding> out;
        for (const auto& o : outputs_) {
            AuditFinding f{scenario.id, o.param, o.tuple, o.cell, 0.0, 0.0, std::nan(""), std::nan(""), Verdict::Fail, {note}};
            out.push_back(std::move(f));
        }
        return out;
    }

    const Workbook& wb_;
    const std::shared_ptr<const model::Model>& model_;
    const BindingSet& bindings_;
    const std::vector<OutputElement>& outputs_;
    const Tolerance& tol_;
};

}  // namespace

AuditReport run_audit(const Workbook& wb, std::shared_ptr<const model::Model> model, const BindingSet& bindings,
                      const std::vector<Scenario>& scenarios, const Tolerance& tol, unsigned threads) {
    if (!(tol.abs >= 0) || !(tol.rel >= 0)) throw Error(ErrorKind::InvalidArgument, "tolerances must be non-negative");

    std::vector<OutputElement> outputs;
    for (const auto& b : bindings.bindings)
        if (b.direction == Direction::Output)
            for (auto& cell : expand(b, *model, wb)) outputs.push_back({b.param, std::move(cell.tuple), cell.address});

    AuditReport report;
    for (const auto& name : model->unused_inputs()) report.warnings.push_back("unused-input: " + name);
    for (const auto& s : scenarios) report.scenario_ids.push_back(s.id);

    ScenarioRun runner(wb, model, bindings, outputs, tol);
    std::vector<std::vector<AuditFinding>> blocks(scenarios.size());
    std::size_t workers = std::min<std::size_t>(threads, scenarios.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < scenarios.size(); ++i) blocks[i] = runner.run(scenarios[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < scenarios.size(); i = next++) blocks[i] = runner.run(scenarios[i]);
            });
        for (auto& t : pool) t.join();
    }
    for (auto& b : blocks)
        for (auto& f : b) report.findings.push_back(std::move(f));
    return report;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string number_or_dash(double v) { return std::isnan(v) ? "-" : format_number(v); }

const char* verdict_name(Verdict v) { return v == Verdict::Pass ? "PASS" : "FAIL"; }

}  // namespace

std::string format_report(const AuditReport& report, ReportMode mode) {
    if (mode == ReportMode::Csv) {
        std::string out = "scenario_id,parameter,tuple,cell,sheet_value,shadow_value,abs_diff,rel_diff,verdict,warnings\n";
        for (const auto& f : report.findings) {
            std::vector<std::string> row{f.scenario_id,
                                         f.param,
                                         format_tuple(f.tuple),
                                         f.cell.to_string(),
                                         format_number(f.sheet_value),
                                         format_number(f.shadow_value),
                                         number_or_dash(f.abs_diff),
                                         number_or_dash(f.rel_diff),
                                         verdict_name(f.verdict),
                                         join(f.warnings, "; ")};
            for (auto& field : row) field = csv_field(field);
            out += join(row, ",") + "\n";
        }
        return out;
    }

    std::vector<std::vector<std::string>> rows{
        {"scenario", "output", "cell", "sheet", "shadow", "abs_diff", "verdict", "warnings"}};
    for (const auto& f : report.findings)
        rows.push_back({f.scenario_id, f.param + format_tuple(f.tuple), f.cell.to_string(), format_number(f.sheet_value),
                        format_number(f.shadow_value), number_or_dash(f.abs_diff), verdict_name(f.verdict),
                        join(f.warnings, "; ")});
    std::vector<std::size_t> width(rows[0].size(), 0);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());

    std::string out;
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t i = 0; i < r.size(); ++i) {
            line += r[i];
            if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
    }

    out += "\n";
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_scenario;
    for (const auto& f : report.findings) {
        auto& [fails, total] = per_scenario[f.scenario_id];
        ++total;
        if (f.verdict == Verdict::Fail) ++fails;
    }
    for (const auto& id : report.scenario_ids) {
        auto [fails, total] = per_scenario[id];
        if (fails) out += "scenario " + id + ": FAIL " + std::to_string(fails) + " / " + std::to_string(total) + "\n";
    }
    for (const auto& w : report.warnings) out += "warning: " + w + "\n";
    out += "scenarios: " + std::to_string(report.scenario_ids.size()) + "\n";
    out += "FAIL: " + std::to_string(report.failures()) + " / " + std::to_string(report.findings.size()) + "\n";
    return out;
}

}  // namespace shadow_audit
