#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>

#include "shadow_audit/audit.hpp"
#include "shadow_audit/binding.hpp"
#include "shadow_audit/cost_model.hpp"
#include "shadow_audit/error.hpp"
#include "shadow_audit/model.hpp"
#include "shadow_audit/recalc.hpp"
#include "shadow_audit/scenario.hpp"
#include "shadow_audit/shadow_eval.hpp"

namespace py = pybind11;
using namespace shadow_audit;

namespace {

Suite suite_from(const std::string& name) {
    if (name == "full") return Suite::Full;
    if (name == "default") return Suite::Default;
    if (name == "oat") return Suite::OneAtATime;
    if (name == "pairwise") return Suite::Pairwise;
    throw py::value_error("suite must be one of full, default, oat, pairwise");
}

std::shared_ptr<const model::Model> load(const std::string& path, const std::vector<std::string>& include_paths) {
    return std::make_shared<const model::Model>(model::load_model(path, include_paths));
}

std::vector<Scenario> scenarios_for(const BindingSet& b, const std::string& suite, std::size_t random,
                                    std::optional<std::uint64_t> seed) {
    if (random > 0 && !seed) throw py::value_error("random scenarios need a seed");
    return generate_suite(b.vars, suite_from(suite), random, seed.value_or(0));
}

py::tuple to_py(const Tuple& t) {
    py::tuple out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i];
    return out;
}

py::dict recalc(const std::string& text) {
    py::dict out;
    for (const auto& [addr, v] : recalculate(parse_workbook(text))) out[py::str(addr.to_string())] = v;
    return out;
}

py::dict shadow_eval(const std::string& model_path, const std::string& data_path,
                     const std::vector<std::string>& include_paths) {
    auto store = load_data(load(model_path, include_paths), load_data_file(data_path));
    store.evaluate();
    py::dict out;
    for (const auto& p : store.model().params()) {
        if (p.role != model::ParamRole::Defined) continue;
        py::dict values;
        for (const auto& [t, v] : store.values(p.name)) values[to_py(t)] = v;
        out[py::str(p.name)] = values;
    }
    return out;
}

py::dict audit(const std::string& workbook_path, const std::string& model_path, const std::string& bindings_path,
               const std::string& suite, std::size_t random, std::optional<std::uint64_t> seed, double abs_tol,
               double rel_tol, unsigned threads, const std::vector<std::string>& include_paths) {
    auto wb = load_workbook(workbook_path);
    auto m = load(model_path, include_paths);
    auto b = load_bindings(bindings_path, *m);
    auto scenarios = scenarios_for(b, suite, random, seed);
    AuditReport report;
    {
        py::gil_scoped_release release;
        report = run_audit(wb, m, b, scenarios, Tolerance{abs_tol, rel_tol}, threads);
    }
    py::list findings;
    for (const auto& f : report.findings) {
        py::dict d;
        d["scenario_id"] = f.scenario_id;
        d["parameter"] = f.param;
        d["tuple"] = to_py(f.tuple);
        d["cell"] = f.cell.to_string();
        d["sheet_value"] = f.sheet_value;
        d["shadow_value"] = f.shadow_value;
        d["abs_diff"] = f.abs_diff;
        d["rel_diff"] = f.rel_diff;
        d["passed"] = f.verdict == Verdict::Pass;
        d["warnings"] = f.warnings;
        findings.append(d);
    }
    py::dict out;
    out["findings"] = findings;
    out["scenario_ids"] = report.scenario_ids;
    out["warnings"] = report.warnings;
    out["failures"] = report.failures();
    out["csv"] = format_report(report, ReportMode::Csv);
    out["text"] = format_report(report, ReportMode::Human);
    return out;
}

std::string scenarios(const std::string& model_path, const std::string& bindings_path, const std::string& suite,
                      std::size_t random, std::optional<std::uint64_t> seed,
                      const std::vector<std::string>& include_paths) {
    auto m = load(model_path, include_paths);
    return emit_scenarios(scenarios_for(load_bindings(bindings_path, *m), suite, random, seed));
}

}  // namespace

PYBIND11_MODULE(shadow_audit, m) {
    m.doc() = "Spreadsheet auditing against an independent shadow model";

    // Carries the error kind name and the trail (cycle path, include chain).
    static PyObject* error_type = PyErr_NewException("shadow_audit.Error", PyExc_RuntimeError, nullptr);
    m.attr("Error") = py::handle(error_type);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
            exc.attr("kind") = std::string(to_string(e.kind()));
            exc.attr("trail") = e.trail();
            PyErr_SetObject(error_type, exc.ptr());
        }
    });

    m.def("recalculate", &recalc, py::arg("workbook_text"), "Values of every number and formula cell, keyed by address.");
    m.def("normalize_workbook", [](const std::string& text) { return serialize_workbook(parse_workbook(text)); },
          py::arg("workbook_text"));
    m.def("normalize_model", [](const std::string& text) { return model::print_model(model::parse_model(text)); },
          py::arg("model_text"));
    m.def("shadow_eval", &shadow_eval, py::arg("model_path"), py::arg("data_path"),
          py::arg("include_paths") = std::vector<std::string>{},
          "Defined parameter values as {name: {tuple: value}}.");
    m.def("audit", &audit, py::arg("workbook_path"), py::arg("model_path"), py::arg("bindings_path"),
          py::arg("suite") = "full", py::arg("random") = 0, py::arg("seed") = py::none(), py::arg("abs_tol") = 1e-9,
          py::arg("rel_tol") = 1e-6, py::arg("threads") = 0, py::arg("include_paths") = std::vector<std::string>{});
    m.def("scenarios", &scenarios, py::arg("model_path"), py::arg("bindings_path"), py::arg("suite") = "full",
          py::arg("random") = 0, py::arg("seed") = py::none(), py::arg("include_paths") = std::vector<std::string>{});

    m.def("distinct_formula_count", &cost::distinct_formula_count, py::arg("dims"), py::arg("levels"));
    m.def("crossover_levels", &cost::crossover_levels, py::arg("dims"), py::arg("ratio") = 2.0);
    m.def("emit_curves", &cost::emit_curves, py::arg("dims"), py::arg("first_level") = 1, py::arg("last_level") = 30,
          py::arg("minutes_per_formula") = 3.0, py::arg("around_ratio") = 2.0);
    m.def("total_effort_check", &cost::total_effort_check, py::arg("formulas"), py::arg("minutes_per_formula") = 3.0);
}
