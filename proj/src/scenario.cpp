#include "shadow_audit/scenario.hpp"

#include <cmath>
#include <random>

#include "shadow_audit/error.hpp"
#include "shadow_audit/text.hpp"

namespace shadow_audit {

std::string target_name(const Target& target) {
    if (const auto* cell = std::get_if<CellAddress>(&target)) return cell->to_string();
    const auto& p = std::get<ParamTarget>(target);
    return p.param + format_tuple(p.tuple);
}

void validate(const InputVar& var) {
    bool finite = std::isfinite(var.min) && std::isfinite(var.max) && std::isfinite(var.default_value);
    if (!finite || var.min > var.default_value || var.default_value > var.max)
        throw Error(ErrorKind::InvalidBounds, var.name() + ": need MIN <= DEFAULT <= MAX");
}

namespace {

Scenario defaults(const std::vector<InputVar>& vars, std::string id) {
    Scenario s{std::move(id), {}, false};
    for (const auto& v : vars) s.assignments.emplace_back(v.target, v.default_value);
    return s;
}

void flag_degenerate(Scenario& s, const std::vector<InputVar>& vars) {
    s.degenerate = true;
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (s.assignments[i].second != vars[i].default_value) s.degenerate = false;
}

}  // namespace

std::vector<Scenario> gen_default(const std::vector<InputVar>& vars) {
    auto s = defaults(vars, "default");
    s.degenerate = false;
    return {std::move(s)};
}

std::vector<Scenario> gen_one_at_a_time(const std::vector<InputVar>& vars) {
    std::vector<Scenario> out;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        for (bool high : {false, true}) {
            auto s = defaults(vars, "oat:" + vars[i].name() + (high ? ":max" : ":min"));
            s.assignments[i].second = high ? vars[i].max : vars[i].min;
            flag_degenerate(s, vars);
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::vector<Scenario> gen_pairwise(const std::vector<InputVar>& vars) {
    if (vars.size() < 2) throw Error(ErrorKind::TooFewVars, "pairwise scenarios need at least two variables");
    std::vector<Scenario> out;
    for (std::size_t i = 0; i < vars.size(); ++i)
        for (std::size_t j = i + 1; j < vars.size(); ++j)
            for (bool hi_i : {false, true})
                for (bool hi_j : {false, true}) {
                    auto s = defaults(vars, "pair:" + vars[i].name() + (hi_i ? ":max" : ":min") + ":" + vars[j].name() +
                                                (hi_j ? ":max" : ":min"));
                    s.assignments[i].second = hi_i ? vars[i].max : vars[i].min;
                    s.assignments[j].second = hi_j ? vars[j].max : vars[j].min;
                    flag_degenerate(s, vars);
                    out.push_back(std::move(s));
                }
    return out;
}

std::vector<Scenario> gen_random(const std::vector<InputVar>& vars, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    std::vector<Scenario> out;
    out.reserve(count);
    for (std::size_t k = 1; k <= count; ++k) {
        Scenario s{"random:" + std::to_string(k), {}, false};
        for (const auto& v : vars) {
            double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
            double x = std::min(v.min + u * (v.max - v.min), v.max);
            s.assignments.emplace_back(v.target, x);
        }
        flag_degenerate(s, vars);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Scenario> generate_suite(const std::vector<InputVar>& vars, Suite suite, std::size_t random_count,
                                     std::uint64_t seed) {
    std::vector<Scenario> out;
    auto append = [&](std::vector<Scenario> more) {
        for (auto& s : more) out.push_back(std::move(s));
    };
    switch (suite) {
        case Suite::Default: append(gen_default(vars)); break;
        case Suite::OneAtATime: append(gen_one_at_a_time(vars)); break;
        case Suite::Pairwise: append(gen_pairwise(vars)); break;
        case Suite::Full:
            append(gen_default(vars));
            append(gen_one_at_a_time(vars));
            if (vars.size() >= 2) append(gen_pairwise(vars));
            break;
    }
    if (random_count > 0) append(gen_random(vars, random_count, seed));
    return out;
}

std::string emit_scenarios(const std::vector<Scenario>& scenarios) {
    std::string out;
    for (const auto& s : scenarios) {
        out += s.id + ":";
        for (std::size_t i = 0; i < s.assignments.size(); ++i) {
            out += i ? "; " : " ";
            out += target_name(s.assignments[i].first) + "=" + format_number(s.assignments[i].second);
        }
        if (s.degenerate) out += "  # degenerate";
        out += '\n';
    }
    return out;
}

}  // namespace shadow_audit
