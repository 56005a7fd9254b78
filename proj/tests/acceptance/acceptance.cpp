// Acceptance checks against the shipped fixtures. Prints one PASS/FAIL line
// per criterion and exits non-zero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support/random_models.hpp"
#include "../support/random_workbooks.hpp"
#include "cli.hpp"
#include "shadow_audit/audit.hpp"
#include "shadow_audit/binding.hpp"
#include "shadow_audit/cost_model.hpp"
#include "shadow_audit/error.hpp"
#include "shadow_audit/formula.hpp"
#include "shadow_audit/model.hpp"
#include "shadow_audit/recalc.hpp"
#include "shadow_audit/scenario.hpp"
#include "shadow_audit/shadow_eval.hpp"
#include "shadow_audit/text.hpp"

using namespace shadow_audit;

namespace {

const std::string kRoot = SHADOW_AUDIT_SOURCE_DIR;
const std::string kFixtureB = kRoot + "/fixtures/telecom_npv";
const std::string kFixtureA = kRoot + "/fixtures/national_distance";
const Tolerance kTol{1e-9, 1e-6};
const std::vector<std::string> kMutants{"dropped_term",   "wrong_sheet_ref",    "transposed_matrix",
                                        "wrong_exponent", "hardcoded_constant", "dropped_year"};

/// Collects failure notes for one criterion.
struct Check {
    std::vector<std::string> problems;
    void expect(bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    }
};

struct CliResult {
    int code;
    std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> audit_args(const std::string& workbook, const std::string& seed) {
    return {"audit", "-w", workbook, "-m", kFixtureB + "/model.shd", "-b", kFixtureB + "/bindings.txt",
            "--suite", "full", "--random", "20", "--seed", seed, "--abs", "1e-9", "--rel", "1e-6", "--format", "csv"};
}

struct FixtureB {
    std::shared_ptr<const model::Model> model;
    BindingSet bindings;
    FixtureB() {
        model = std::make_shared<const model::Model>(model::load_model(kFixtureB + "/model.shd", {}));
        bindings = load_bindings(kFixtureB + "/bindings.txt", *model);
    }
};

bool bitwise_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// 1. Clean fixture passes the full suite; shadow NPV agrees with the oracle file.
void clean_fixture(Check& c) {
    auto start = std::chrono::steady_clock::now();
    auto r = cli(audit_args(kFixtureB + "/workbook.txt", "7"));
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(r.code == 0, "audit exit code " + std::to_string(r.code) + ": " + r.err);
    c.expect(r.out.find(",FAIL,") == std::string::npos, "report contains FAIL rows");
    auto rows = std::count(r.out.begin(), r.out.end(), '\n') - 1;
    c.expect(rows == (1 + 8 + 24 + 20) * 3, "expected 159 findings, got " + std::to_string(rows));
    c.expect(seconds < 5.0, "audit took " + std::to_string(seconds) + " s");

    FixtureB fx;
    auto wb = load_workbook(kFixtureB + "/workbook.txt");
    auto store = load_data(fx.model, import_inputs(wb, recalculate(wb), fx.bindings, *fx.model));
    store.evaluate();
    std::map<std::string, double> expected;
    auto expected_text = read_file(kFixtureB + "/expected_npv.txt");
    for (auto line : split(expected_text, '\n')) {
        auto eq = line.find(" = ");
        if (eq == std::string_view::npos) continue;
        auto name = std::string(line.substr(0, eq));
        expected[name.substr(4, name.size() - 5)] = *parse_decimal(line.substr(eq + 3));
    }
    c.expect(expected.size() == 3, "expected_npv.txt must list three scenarios");
    for (const auto& [s, v] : expected) {
        double got = store.query("NPV", {s});
        c.expect(std::fabs(got - v) <= 1e-9 * std::max(1.0, std::fabs(v)),
                 "NPV(" + s + ") shadow " + format_number(got) + " vs oracle " + format_number(v));
    }

    // The data file the oracle reads is exactly what the workbook holds.
    auto from_file = load_data(fx.model, load_data_file(kFixtureB + "/data.dat"));
    for (const auto& p : fx.model->params())
        if (p.role == model::ParamRole::Input) c.expect(from_file.values(p.name) == store.values(p.name), "data.dat differs for " + p.name);
}

// 2. Every mutant fails somewhere; the dropped-year mutant fails exactly on
// scenarios with volume in the dropped year.
void mutants(Check& c) {
    FixtureB fx;
    auto scenarios = generate_suite(fx.bindings.vars, Suite::Full, 20, 7);
    auto growth = CellAddress::parse("Y2005!B11");
    for (const auto& name : kMutants) {
        auto wb = load_workbook(kFixtureB + "/mutants/" + name + ".txt");
        auto report = run_audit(wb, fx.model, fx.bindings, scenarios, kTol, 4);
        c.expect(report.failures() >= 1, name + " produced no FAIL");
        if (name != "dropped_year") continue;
        std::map<std::string, bool> zero_volume;
        for (const auto& s : scenarios) {
            bool zero = false;
            for (const auto& [target, v] : s.assignments)
                if (std::get_if<CellAddress>(&target) && std::get<CellAddress>(target) == growth) zero = v == 0.0;
            zero_volume[s.id] = zero;
        }
        std::size_t zero_count = 0;
        for (const auto& [id, z] : zero_volume) zero_count += z;
        c.expect(zero_count > 0, "suite has no zero-volume scenario for the dropped year");
        for (const auto& f : report.findings) {
            bool should_pass = zero_volume[f.scenario_id];
            c.expect((f.verdict == Verdict::Pass) == should_pass,
                     "dropped_year " + f.scenario_id + " " + f.param + format_tuple(f.tuple) + " verdict mismatch");
        }
    }
}

// 3. Filtered MAX against brute force on random city instances.
void filtered_max(Check& c) {
    auto source = read_file(kFixtureA + "/model.shd");
    std::mt19937_64 rng(31);
    for (int instance = 0; instance < 10; ++instance) {
        std::size_t n = 2 + rng() % 5;
        std::vector<std::string> cities;
        for (std::size_t i = 0; i < n; ++i) cities.push_back("C" + std::to_string(i));
        auto text = source;
        auto pos = text.find("SET Cities(c) := {Ams, Rot, Ber};");
        text.replace(pos, std::strlen("SET Cities(c) := {Ams, Rot, Ber};"), "SET Cities(c) := {" + join(cities, ", ") + "};");
        auto m = std::make_shared<const model::Model>(model::parse_model(text));

        std::vector<int> country(n);
        std::vector<Assignment> data;
        for (std::size_t i = 0; i < n; ++i) {
            country[i] = 1 + static_cast<int>(rng() % 2);
            data.push_back({"Country", {cities[i]}, static_cast<double>(country[i])});
        }
        std::map<std::pair<std::size_t, std::size_t>, double> dist;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) {
                double v = static_cast<double>(1 + rng() % 900);
                dist[{i, j}] = v;
                data.push_back({"Distance", {cities[i], cities[j]}, v});
            }
        auto store = load_data(m, data);
        store.evaluate();

        double best = -INFINITY;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (country[i] == country[j]) {
                    auto it = dist.find({i, j});
                    best = std::max(best, it == dist.end() ? 0.0 : it->second);
                }
        double got = store.query("LargestNationalDistance", {});
        c.expect(got == best, "instance " + std::to_string(instance) + ": " + format_number(got) + " vs " + format_number(best));
    }
}

// 4. Recalculation against the naive fixed point; cycles are reported with a path.
void formula_oracle(Check& c) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 200; ++i) {
        auto g = testsupport::generate_workbook(rng, 50, true);
        auto expected = testsupport::fixed_point_oracle(g);
        if (!expected) {
            c.expect(false, "oracle did not converge");
            continue;
        }
        ValueGrid values;
        try {
            values = recalculate(g.workbook);
        } catch (const Error& e) {
            // Products of large chains can overflow; the engine rejects those.
            c.expect(e.kind() == ErrorKind::NonFinite, std::string("workbook raised ") + e.what());
            continue;
        }
        for (const auto& [addr, _] : g.formulas)
            c.expect(bitwise_equal(values.at(addr), expected->at(addr)), "workbook " + std::to_string(i) + " " + addr.to_string());
    }
    int cyclic = 0;
    for (int i = 0; i < 25; ++i) {
        auto g = testsupport::generate_workbook(rng, 50, false);
        try {
            recalculate(g.workbook);
            c.expect(false, "cyclic workbook " + std::to_string(i) + " recalculated");
        } catch (const Error& e) {
            c.expect(e.kind() == ErrorKind::Cycle, "cyclic workbook " + std::to_string(i) + ": " + e.what());
            const auto& path = e.trail();
            bool valid = path.size() >= 2 && path.front() == path.back();
            for (std::size_t k = 0; valid && k + 1 < path.size(); ++k) {
                auto from = CellAddress::parse(path[k]);
                const auto& content = g.workbook.get_cell(from);
                valid = content.kind() == CellContent::Kind::Formula &&
                        formula::extract_dependencies(formula::parse(content.as_formula()), from.sheet)
                            .count(CellAddress::parse(path[k + 1]));
            }
            c.expect(valid, "cycle path is not a chain of references: " + join(path, " -> "));
            ++cyclic;
        }
    }
    c.expect(cyclic >= 20, "fewer than 20 cyclic workbooks checked");
}

std::vector<Assignment> assignments_of(const testsupport::RandomModel& rm) {
    std::vector<Assignment> out;
    for (const auto& [param, values] : rm.data)
        for (const auto& [tuple, v] : values) {
            Tuple t;
            for (int e : tuple) t.push_back(std::to_string(e));
            out.push_back({param, t, static_cast<double>(v)});
        }
    return out;
}

// 5. Shadow evaluation against exhaustive enumeration; incremental = fresh.
void shadow_oracle(Check& c) {
    std::mt19937_64 rng(5);
    int compared = 0;
    while (compared < 100) {
        auto rm = testsupport::generate_model(rng);
        auto m = std::make_shared<const model::Model>(model::parse_model(rm.source));
        auto store = load_data(m, assignments_of(rm));
        testsupport::ModelOracle oracle(rm);
        std::map<std::string, std::vector<double>> expected;
        try {
            for (const auto& p : rm.params)
                if (p.body)
                    for (const auto& t : oracle.tuples(p.name)) expected[p.name].push_back(oracle.value(p.name, t));
        } catch (const testsupport::OracleEmpty&) {
            try {
                store.evaluate();
                c.expect(false, "model without a MAX/MIN element evaluated:\n" + rm.source);
            } catch (const Error& e) {
                c.expect(e.kind() == ErrorKind::EmptyAggregate, e.what());
            }
            continue;
        }
        store.evaluate();
        for (const auto& [name, values] : expected) {
            auto tuples = store.domain_tuples(name);
            for (std::size_t k = 0; k < values.size(); ++k)
                c.expect(bitwise_equal(store.query(name, tuples[k]), values[k]), name + " differs in:\n" + rm.source);
        }
        ++compared;
    }

    int mutated = 0;
    while (mutated < 100) {
        auto rm = testsupport::generate_model(rng);
        auto m = std::make_shared<const model::Model>(model::parse_model(rm.source));
        auto data = assignments_of(rm);
        auto store = load_data(m, data);
        try {
            store.evaluate();
        } catch (const Error&) {
            continue;
        }
        const auto& input = rm.params[rng() % 2];
        auto tuples = store.domain_tuples(input.name);
        auto tuple = tuples[rng() % tuples.size()];
        double v = static_cast<double>(static_cast<long>(rng() % 21) - 10);
        store.set_input(input.name, tuple, v);
        data.push_back({input.name, tuple, v});
        auto fresh = load_data(m, data);
        try {
            fresh.evaluate();
            store.evaluate();
        } catch (const Error&) {
            continue;
        }
        for (const auto& p : rm.params)
            for (const auto& t : store.domain_tuples(p.name))
                c.expect(bitwise_equal(store.query(p.name, t), fresh.query(p.name, t)), "incremental differs for " + p.name);
        ++mutated;
    }
}

// 6. Traditional effort for 500 and 1500 formulas at 3 minutes each.
void effort_arithmetic(Check& c) {
    c.expect(cost::total_effort_check(500, 3) == 25.0, "500 formulas");
    c.expect(cost::total_effort_check(1500, 3) == 75.0, "1500 formulas");
}

// 7. Crossover points and curve shape.
void curves(Check& c) {
    c.expect(cost::crossover_levels(3, 2) == 2, "d=3");
    c.expect(cost::crossover_levels(4, 2) == 2, "d=4");
    c.expect(!cost::crossover_levels(1, 2) && !cost::crossover_levels(2, 2), "d<=2 never crosses");

    auto csv = cost::emit_curves({1, 2, 3, 4}, 1, 30);
    auto lines = split(csv, '\n');
    c.expect(lines[0] == "d,levels,traditional_minutes,around_minutes", "header");
    std::map<int, std::vector<std::pair<double, double>>> by_d;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto f = split(lines[i], ',');
        by_d[static_cast<int>(*parse_decimal(f[0]))].emplace_back(*parse_decimal(f[2]), *parse_decimal(f[3]));
    }
    std::size_t rows = 0;
    for (const auto& [d, points] : by_d) {
        rows += points.size();
        for (std::size_t k = 1; k < points.size(); ++k) {
            c.expect(points[k].second == points[0].second, "around not constant for d=" + std::to_string(d));
            if (d >= 3) c.expect(points[k].first >= points[k - 1].first, "traditional decreases for d=" + std::to_string(d));
        }
        if (d >= 3)
            for (std::size_t k = 0; k < points.size(); ++k)
                if (static_cast<std::int64_t>(k + 1) > *cost::crossover_levels(d, 2))
                    c.expect(points[k].first > points[k].second, "traditional not above around past crossover");
    }
    c.expect(rows == 120, "expected 120 rows");
}

// 8. Suite size for four variables and byte-identical reruns.
void determinism(Check& c) {
    FixtureB fx;
    c.expect(fx.bindings.vars.size() == 4, "fixture declares four variables");
    for (std::size_t n : {0, 5, 20})
        c.expect(generate_suite(fx.bindings.vars, Suite::Full, n, 42).size() == 1 + 8 + 24 + n, "suite size with N=" + std::to_string(n));

    std::vector<std::string> scen{"scenarios", "-m", kFixtureB + "/model.shd", "-b", kFixtureB + "/bindings.txt",
                                  "--suite", "full", "--random", "20", "--seed", "42"};
    auto a = cli(scen), b = cli(scen);
    c.expect(a.code == 0 && a.out == b.out && !a.out.empty(), "scenario emission differs between runs");

    auto r1 = cli(audit_args(kFixtureB + "/workbook.txt", "42"));
    auto r2 = cli(audit_args(kFixtureB + "/workbook.txt", "42"));
    c.expect(r1.out == r2.out && !r1.out.empty(), "audit reports differ between runs");

    auto wb = load_workbook(kFixtureB + "/mutants/dropped_term.txt");
    auto scenarios = generate_suite(fx.bindings.vars, Suite::Full, 20, 42);
    auto serial = format_report(run_audit(wb, fx.model, fx.bindings, scenarios, kTol, 0), ReportMode::Csv);
    auto parallel = format_report(run_audit(wb, fx.model, fx.bindings, scenarios, kTol, 8), ReportMode::Csv);
    c.expect(serial == parallel, "parallel report differs from serial");
}

// 9. Workbook and model round trips on every fixture plus random inputs.
void round_trips(Check& c) {
    std::vector<std::string> workbooks{kFixtureB + "/workbook.txt"};
    for (const auto& m : kMutants) workbooks.push_back(kFixtureB + "/mutants/" + m + ".txt");
    for (const auto& path : workbooks) {
        auto wb = load_workbook(path);
        auto text = serialize_workbook(wb);
        c.expect(parse_workbook(text) == wb, path + " changes on reload");
        c.expect(serialize_workbook(parse_workbook(text)) == text, path + " is not byte-stable");
    }
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        auto g = testsupport::generate_workbook(rng, 30, true);
        auto text = serialize_workbook(g.workbook);
        c.expect(parse_workbook(text) == g.workbook, "random workbook " + std::to_string(i));
        c.expect(serialize_workbook(parse_workbook(text)) == text, "random workbook text " + std::to_string(i));
    }

    std::vector<model::Model> models{model::load_model(kFixtureB + "/model.shd", {}),
                                     model::load_model(kFixtureA + "/model.shd", {})};
    models.push_back(model::parse_model("SET Time(t, tt) := {0, 1, 2};\nPARAM DiscountRate;\nPARAM CashFlow(t);\n" +
                                        read_file(kRoot + "/lib/finance.lib")));
    for (int i = 0; i < 200; ++i) models.push_back(model::parse_model(testsupport::generate_model(rng).source));
    for (const auto& m : models) {
        auto text = model::print_model(m);
        c.expect(model::parse_model(text) == m, "model changes through print/parse:\n" + text);
        c.expect(model::print_model(model::parse_model(text)) == text, "model text is not stable");
    }
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void(Check&)> run;
    };
    std::vector<Criterion> criteria{
        {1, "telecom NPV fixture, full suite, 0 FAIL under 5 s, oracle agrees", clean_fixture},
        {2, "seeded mutants fail; dropped year fails only where it has volume", mutants},
        {3, "filtered MAX equals brute force on 10 random instances", filtered_max},
        {4, "200 acyclic workbooks match fixed point; cyclic ones report a path", formula_oracle},
        {5, "100 random models match enumeration; incremental equals fresh", shadow_oracle},
        {6, "500 and 1500 formulas at 3 minutes give 25 h and 75 h", effort_arithmetic},
        {7, "crossover at 2 levels for d=3,4, none for d<=2, curve shape", curves},
        {8, "suite size 1+8+24+N for 4 vars; seeded runs are byte-identical", determinism},
        {9, "workbook and model round trips on fixtures and random inputs", round_trips},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Check check;
        try {
            cr.run(check);
        } catch (const std::exception& e) {
            check.problems.push_back(std::string("exception: ") + e.what());
        }
        bool ok = check.problems.empty();
        failed += !ok;
        std::cout << "criterion " << cr.id << ": " << (ok ? "PASS" : "FAIL") << "  " << cr.name << "\n";
        for (std::size_t i = 0; i < std::min<std::size_t>(check.problems.size(), 5); ++i)
            std::cout << "    " << check.problems[i] << "\n";
        if (check.problems.size() > 5) std::cout << "    ... " << check.problems.size() - 5 << " more\n";
    }
    return failed == 0 ? 0 : 1;
}
